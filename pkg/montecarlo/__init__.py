# montecarlo package
