"""
Context variables for run-scoped data.
Used to tag log records and events emitted deep inside training code.
"""
from contextvars import ContextVar
from typing import Optional

run_id_var: ContextVar[Optional[str]] = ContextVar("run_id", default=None)
run_seed_var: ContextVar[Optional[int]] = ContextVar("run_seed", default=None)


def get_current_run_id() -> Optional[str]:
	return run_id_var.get()


def get_current_seed() -> Optional[int]:
	return run_seed_var.get()


def set_run_context(run_id: Optional[str] = None, seed: Optional[int] = None) -> None:
	"""Set the run identity for the current thread of control."""
	if run_id is not None:
		run_id_var.set(run_id)
	if seed is not None:
		run_seed_var.set(seed)


def clear_run_context() -> None:
	run_id_var.set(None)
	run_seed_var.set(None)
