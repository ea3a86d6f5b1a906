# solvers package
