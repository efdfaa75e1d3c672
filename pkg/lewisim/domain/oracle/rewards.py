"""
Cooperative rewards of the form r(x, m) = -D(1_x || rho(.|m)) + K.

Each reward supplies D evaluated on a whole listener matrix and the listener
that minimises the expected D under a posterior row. Only the two instances with
a closed-form optimal listener are provided; a reward without one cannot be
decomposed.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Dict, Type

import numpy as np

from lewisim.core.errors import ConfigurationError
from lewisim.domain.oracle import rules as oracle_rules


class RewardSpec(ABC):
	name: str = "reward"
	offset: float = 0.0

	@abstractmethod
	def divergence(self, listener: np.ndarray) -> np.ndarray:
		"""D(1_x || rho(.|m)) as an |M| x |X| matrix."""

	def reward(self, listener: np.ndarray) -> np.ndarray:
		return -self.divergence(listener) + self.offset

	def optimal_listener(self, posterior_rows: np.ndarray) -> np.ndarray:
		raise ConfigurationError(f"reward {self.name!r} has no optimal-listener rule", field="reward")


class LogLikelihoodReward(RewardSpec):
	"""D = KL(1_x || q) = -log q(x), K = 0; the optimal listener is the posterior itself."""

	name = "loglik"
	offset = 0.0

	def divergence(self, listener: np.ndarray) -> np.ndarray:
		with np.errstate(divide="ignore"):
			return -np.log(listener)

	def optimal_listener(self, posterior_rows: np.ndarray) -> np.ndarray:
		return posterior_rows


class AccuracyReward(RewardSpec):
	"""D = 1 - q(x), K = 1, so r = q(x): the expected accuracy of a sampled guess.

	The optimal listener puts all mass on the posterior mode, lowest index on ties.
	"""

	name = "accuracy"
	offset = 1.0

	def divergence(self, listener: np.ndarray) -> np.ndarray:
		return 1.0 - listener

	def optimal_listener(self, posterior_rows: np.ndarray) -> np.ndarray:
		return oracle_rules.dirac_rows(oracle_rules.argmax_lowest(posterior_rows), posterior_rows.shape[1])


REWARDS: Dict[str, Type[RewardSpec]] = {
	LogLikelihoodReward.name: LogLikelihoodReward,
	AccuracyReward.name: AccuracyReward,
}


def reward_by_name(name: str) -> RewardSpec:
	if name not in REWARDS:
		raise ConfigurationError(f"unknown reward {name!r}; expected one of {sorted(REWARDS)}", field="reward")
	return REWARDS[name]()
