import logging
from typing import Optional

from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class AppConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # -------------------------------------------------------------------------
    # LOGGING
    # El log de corridas (logs/runs_log.csv) vive fuera del directorio de
    # salida: los artefactos quedan idénticos byte a byte entre corridas.
    # -------------------------------------------------------------------------
    LOG_LEVEL: str = Field(default="INFO", description="DEBUG | INFO | WARNING | ERROR")
    LOG_DIR: str = Field(default="logs")

    # -------------------------------------------------------------------------
    # SALIDAS
    # -------------------------------------------------------------------------
    OUTPUT_DIR: str = Field(default="outputs", description="Directorio base; cada comando escribe una subcarpeta.")
    FLOAT_FORMAT: str = Field(default="%.17g", description="Precisión completa para comparar contra archivos golden.")
    SVG_ENABLED: bool = Field(default=True, description="Escribe figuras SVG junto a sus CSV.")
    SVG_HASHSALT: str = Field(default="exact-solvers", description="Salt fijo para ids SVG reproducibles.")

    # -------------------------------------------------------------------------
    # TOLERANCIAS
    # -------------------------------------------------------------------------
    DEFAULT_TOLERANCE: float = Field(default=1e-10, description="Umbral pass/fail de los cross-checks.")
    HULL_SLOPE_TOL: float = Field(default=1e-12, description="Piezas del hull con pendientes así de cercanas se fusionan.")
    TIE_TOL: float = Field(default=1e-12, description="Tolerancia relativa de empate al minimizar por ramas.")
    VISCOSITY_SAMPLES: int = Field(default=64)

    # -------------------------------------------------------------------------
    # MONTE CARLO
    # -------------------------------------------------------------------------
    DEFAULT_WORKERS: int = Field(default=1, description="Procesos de mc-stats. 1 = en el mismo proceso.")
    MC_TARGET_STDERR: float = Field(
        default=0.0,
        description="Avisa si un residuo de jerarquía tiene un error estándar mayor. 0 = deshabilitado."
    )
    DEFAULT_SCENARIO: str = Field(default="config/scenarios/four_particles.yaml")

    # =========================================================================
    # VALIDADOR: normaliza LOG_LEVEL y exige tolerancias positivas
    # =========================================================================
    @model_validator(mode="after")
    def _normalise(self) -> "AppConfig":
        level = self.LOG_LEVEL.upper()
        if level not in LOG_LEVELS:
            raise ValueError(
                f"LOG_LEVEL='{self.LOG_LEVEL}' no reconocido. "
                "Valores válidos: DEBUG | INFO | WARNING | ERROR | CRITICAL"
            )
        object.__setattr__(self, "LOG_LEVEL", level)

        for name in ("DEFAULT_TOLERANCE", "HULL_SLOPE_TOL", "TIE_TOL"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} debe ser positivo, recibido {getattr(self, name)}")
        if self.DEFAULT_WORKERS < 1:
            raise ValueError(f"DEFAULT_WORKERS debe ser >= 1, recibido {self.DEFAULT_WORKERS}")
        return self

    # =========================================================================
    # PROPIEDADES DE CONVENIENCIA
    # =========================================================================

    @property
    def log_level(self) -> int:
        return getattr(logging, self.LOG_LEVEL)

    def output_dir_for(self, command: str, out: Optional[str] = None) -> str:
        """--out explícito gana; si no, OUTPUT_DIR/<command>."""
        if out:
            return out
        return f"{self.OUTPUT_DIR}/{command}"


# =============================================================================
# INSTANCIA GLOBAL
# =============================================================================
config = AppConfig()

# Atajos a nivel módulo
FLOAT_FORMAT: str = config.FLOAT_FORMAT
DEFAULT_TOLERANCE: float = config.DEFAULT_TOLERANCE
