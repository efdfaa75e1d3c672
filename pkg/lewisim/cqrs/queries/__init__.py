# Queries package
