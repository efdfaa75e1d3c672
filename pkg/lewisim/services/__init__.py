"""Application services: training, probing, evaluation, sweeps, plots, artifact storage."""
