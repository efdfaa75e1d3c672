from __future__ import annotations

import zlib

import numpy as np


def stream_key(name: str) -> int:
	"""Stable 32-bit key of a stream name (independent of PYTHONHASHSEED)."""
	return zlib.crc32(name.encode("utf-8"))


class RngStreams:
	"""Named, independent random substreams derived from one master seed.

	generator("listener_init", 3) always yields the same stream for a given master
	seed, and drawing from it never perturbs any other stream.
	"""

	def __init__(self, master_seed: int):
		if int(master_seed) < 0:
			raise ValueError("master seed must be non-negative")
		self.master_seed = int(master_seed)

	def seed_sequence(self, name: str, *index: int) -> np.random.SeedSequence:
		return np.random.SeedSequence(entropy=self.master_seed, spawn_key=(stream_key(name), *[int(i) for i in index]))

	def generator(self, name: str, *index: int) -> np.random.Generator:
		return np.random.default_rng(self.seed_sequence(name, *index))

	def child_seed(self, name: str, *index: int) -> int:
		"""A plain integer seed for APIs that want one (split files, sub-runs)."""
		return int(self.seed_sequence(name, *index).generate_state(1, dtype=np.uint32)[0])
