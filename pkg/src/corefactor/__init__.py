"""k-cores, k-factors and thresholds of sparse random graphs."""
