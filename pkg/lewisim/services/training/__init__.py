"""Lewis game training: update steps, listener regimes, early stopping."""
