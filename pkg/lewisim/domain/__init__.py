"""Pure domain logic, one package per bounded context."""
