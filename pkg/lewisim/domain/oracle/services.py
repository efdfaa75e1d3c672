from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import entr, rel_entr, xlogy

from lewisim.core.errors import ArtifactError, ConfigurationError, ContractViolation
from lewisim.core.logger import logger
from lewisim.domain.agents.entities import Channel, Message, MessageBatch
from lewisim.domain.env.entities import ObjectSpace
from lewisim.domain.oracle import rules as oracle_rules
from lewisim.domain.oracle.entities import DecompositionRecord, GapSplit, Posterior, TabularGame
from lewisim.domain.oracle.rewards import AccuracyReward, LogLikelihoodReward, RewardSpec

# largest |X| * |M| table tabular_from_policy will build
MAX_TABLE_CELLS = 5_000_000


def _safe_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
	return np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)


def _weighted_sum(weight: np.ndarray, values: np.ndarray) -> float:
	"""sum(weight * values) over weight > 0 only, so 0 * inf contributes 0."""
	with np.errstate(invalid="ignore", over="ignore"):
		return float(np.sum(np.where(weight > 0, weight * values, 0.0)))


def posterior(game: TabularGame) -> Posterior:
	"""rho*(x|m) = p(x) pi(m|x) / pi(m); zero-marginal rows are left at zero and flagged."""
	joint = game.joint
	marginal = joint.sum(axis=0)
	defined = marginal > 0
	rows = np.zeros((game.n_messages, game.n_objects))
	rows[defined] = joint[:, defined].T / marginal[defined, None]
	return Posterior(rows=rows, defined=defined, marginal=marginal)


def completed_posterior(game: TabularGame) -> np.ndarray:
	"""Posterior rows with undefined rows replaced by the uniform distribution."""
	post = posterior(game)
	rows = post.rows.copy()
	rows[~post.defined] = 1.0 / game.n_objects
	return rows


def entropy(p: np.ndarray) -> float:
	"""Shannon entropy in nats."""
	return float(entr(np.asarray(p, dtype=np.float64)).sum())


def prior_entropy(game: TabularGame) -> float:
	return entropy(game.prior)


def conditional_entropy(game: TabularGame) -> float:
	"""H(X|M) = -sum p(x) pi(m|x) log rho*(x|m)."""
	joint = game.joint
	return float(-xlogy(joint, _safe_divide(joint, game.marginal[None, :])).sum())


def mutual_information(game: TabularGame) -> float:
	joint = game.joint
	independent = game.prior[:, None] * game.marginal[None, :]
	return float(rel_entr(joint, independent).sum())


def expected_loss(game: TabularGame) -> float:
	"""Direct L = -sum p(x) pi(m|x) log rho(x|m); +inf when the listener misses supported pairs."""
	return float(-xlogy(game.joint, game.listener.T).sum())


def decompose_loglik(game: TabularGame) -> DecompositionRecord:
	"""L = H(X|M) + E_m KL(rho*(.|m) || rho(.|m)), each term computed on its own."""
	post = posterior(game)
	total = expected_loss(game)
	info = conditional_entropy(game)
	if not np.isfinite(total):
		return DecompositionRecord(total=float("inf"), info=info, adapt=float("inf"), residual=float("nan"), infinite=True)
	kl_rows = rel_entr(post.rows, game.listener).sum(axis=1)
	adapt = float(np.dot(post.marginal, kl_rows))
	return DecompositionRecord(total=total, info=info, adapt=adapt, residual=total - (info + adapt))


def decompose_general(game: TabularGame, reward: RewardSpec) -> Tuple[DecompositionRecord, np.ndarray]:
	"""Decompose L = -E[r] = info + adapt - K for r = -D(1_x || rho) + K.

	Returns the record and the reward-optimal listener (|M| x |X|, undefined rows uniform).
	"""
	post = posterior(game)
	optimal = reward.optimal_listener(completed_posterior(game))
	weight = game.joint.T
	d_listener = reward.divergence(game.listener)
	d_optimal = reward.divergence(optimal)
	info = _weighted_sum(weight, d_optimal)
	with np.errstate(invalid="ignore"):
		adapt = _weighted_sum(weight, d_listener - d_optimal)
		total = -_weighted_sum(weight, reward.reward(game.listener))
	if not np.isfinite(total):
		return DecompositionRecord(
			total=float("inf"), info=info, adapt=float("inf"), residual=float("nan"),
			offset=reward.offset, infinite=True,
		), optimal
	residual = total - (info + adapt - reward.offset)
	return DecompositionRecord(total=total, info=info, adapt=adapt, residual=residual, offset=reward.offset), optimal


def gap_split(train_game: TabularGame, full_game: TabularGame) -> GapSplit:
	"""Information and co-adaptation overfitting gaps: train-prior terms minus full-prior terms."""
	if not (np.array_equal(train_game.speaker, full_game.speaker) and np.array_equal(train_game.listener, full_game.listener)):
		raise ContractViolation("gap split needs the same speaker and listener under both priors")
	train = decompose_loglik(train_game)
	full = decompose_loglik(full_game)
	return GapSplit(
		info_gap=train.info - full.info,
		adapt_gap=train.adapt - full.adapt,
		total_gap=train.total - full.total,
		train=train,
		full=full,
	)


def is_unambiguous(game: TabularGame) -> bool:
	"""Every message in the support points to a single object."""
	post = posterior(game)
	return all(oracle_rules.is_dirac(row) for row in post.rows[post.defined])


def listener_matches_posterior(game: TabularGame, atol: float = 1e-12) -> bool:
	post = posterior(game)
	return bool(np.allclose(game.listener[post.defined], post.rows[post.defined], rtol=0.0, atol=atol))


def _sparsify(rows: np.ndarray, rng: np.random.Generator, sparsity: float) -> np.ndarray:
	if sparsity <= 0:
		return rows
	mask = rng.random(rows.shape) >= sparsity
	keep = rng.integers(0, rows.shape[-1], size=rows.shape[:-1])
	mask[np.arange(rows.shape[0]), keep] = True
	return rows * mask


def _normalize(rows: np.ndarray) -> np.ndarray:
	return rows / rows.sum(axis=-1, keepdims=True)


def random_game(
	rng: np.random.Generator,
	n_objects: int,
	n_messages: int,
	sparsity: float = 0.0,
) -> TabularGame:
	"""Dirichlet(1) prior and speaker rows (optionally with zeroed entries) and a dense listener."""
	if n_objects < 1 or n_messages < 1:
		raise ConfigurationError("a game needs at least one object and one message")
	prior = _normalize(_sparsify(rng.dirichlet(np.ones(n_objects))[None, :], rng, sparsity))[0]
	speaker = _normalize(_sparsify(rng.dirichlet(np.ones(n_messages), size=n_objects), rng, sparsity))
	listener = _normalize(rng.dirichlet(np.ones(n_objects), size=n_messages))
	return TabularGame(prior, speaker, listener)


def gibbs_violations(game: TabularGame, rng: np.random.Generator, n_listeners: int = 1000, tolerance: float = 1e-12) -> int:
	"""How many random perturbations of the posterior listener beat it on expected loss."""
	optimal = completed_posterior(game)
	best = expected_loss(game.with_listener(optimal))
	violations = 0
	for _ in range(n_listeners):
		w = rng.random()
		noise = rng.dirichlet(np.ones(game.n_objects), size=game.n_messages)
		candidate = _normalize((1.0 - w) * optimal + w * noise)
		if expected_loss(game.with_listener(candidate)) < best - tolerance:
			violations += 1
	return violations


@dataclass
class OracleVerification:
	n_games: int
	max_residual_loglik: float = 0.0
	max_residual_accuracy: float = 0.0
	max_entropy_identity_error: float = 0.0
	max_conditional_entropy_error: float = 0.0
	gibbs_games: int = 0
	gibbs_violations: int = 0
	tie_rule_failures: int = 0
	negative_adapt: int = 0
	failures: List[str] = field(default_factory=list)

	@property
	def passed(self) -> bool:
		return (
			self.max_residual_loglik <= 1e-10
			and self.max_residual_accuracy <= 1e-10
			and self.max_entropy_identity_error <= 1e-12
			and self.max_conditional_entropy_error <= 1e-12
			and self.gibbs_violations == 0
			and self.tie_rule_failures == 0
			and self.negative_adapt == 0
		)


def verify_random_games(
	rng: np.random.Generator,
	n_games: int = 1000,
	max_size: int = 16,
	gibbs_games: int = 100,
	gibbs_listeners: int = 1000,
	sparsity: float = 0.3,
) -> OracleVerification:
	"""Check the decomposition identities, Gibbs optimality and entropy identities on random games."""
	report = OracleVerification(n_games=n_games, gibbs_games=min(gibbs_games, n_games))
	loglik, accuracy = LogLikelihoodReward(), AccuracyReward()
	for i in range(n_games):
		game = random_game(rng, int(rng.integers(1, max_size + 1)), int(rng.integers(1, max_size + 1)), sparsity=sparsity)
		record = decompose_loglik(game)
		report.max_residual_loglik = max(report.max_residual_loglik, abs(record.residual))
		acc_record, optimal = decompose_general(game, accuracy)
		report.max_residual_accuracy = max(report.max_residual_accuracy, abs(acc_record.residual))
		if record.adapt < -1e-12 or acc_record.adapt < -1e-12:
			report.negative_adapt += 1
		post = posterior(game)
		modes = np.argmax(post.rows[post.defined], axis=1)
		if not (np.array_equal(np.argmax(optimal[post.defined], axis=1), modes) and np.all(optimal[post.defined].max(axis=1) == 1.0)):
			report.tie_rule_failures += 1
		h_x, h_xm, mi = prior_entropy(game), conditional_entropy(game), mutual_information(game)
		report.max_entropy_identity_error = max(report.max_entropy_identity_error, abs(h_xm - (h_x - mi)))
		h_joint = entropy(game.joint.reshape(-1))
		report.max_conditional_entropy_error = max(report.max_conditional_entropy_error, abs(h_xm - (h_joint - entropy(game.marginal))))
		if i < report.gibbs_games:
			report.gibbs_violations += gibbs_violations(game, rng, gibbs_listeners)
	for name, ok in (
		("loglik residual", report.max_residual_loglik <= 1e-10),
		("accuracy residual", report.max_residual_accuracy <= 1e-10),
		("entropy identity", report.max_entropy_identity_error <= 1e-12),
		("conditional entropy", report.max_conditional_entropy_error <= 1e-12),
		("gibbs optimality", report.gibbs_violations == 0),
		("accuracy tie rule", report.tie_rule_failures == 0),
		("non-negative adapt", report.negative_adapt == 0),
	):
		if not ok:
			report.failures.append(name)
	logger.debug(f"Oracle verification over {n_games} games: failures={report.failures}")
	return report


def tabular_from_policy(
	speaker,
	listener,
	space: ObjectSpace,
	channel: Channel,
	prior: Optional[np.ndarray] = None,
) -> Tuple[TabularGame, List[Message]]:
	"""Exact TabularGame of a speaker/listener pair over an enumerable space and channel.

	Every emittable message is scored; rows are renormalised to absorb float drift.
	"""
	from lewisim.domain.agents.services import enumerate_messages

	messages = enumerate_messages(channel)
	if space.size * len(messages) > MAX_TABLE_CELLS:
		raise ConfigurationError(
			f"{space.size} objects x {len(messages)} messages is too large to enumerate", field="channel"
		)
	batch = MessageBatch.from_messages(messages, channel)
	attrs = space.decode(np.arange(space.size))
	table = np.zeros((space.size, len(messages)))
	for x in range(space.size):
		table[x] = speaker.message_probs(np.repeat(attrs[x:x + 1], len(messages), axis=0), batch)
	drift = float(np.max(np.abs(table.sum(axis=1) - 1.0)))
	if drift > 1e-8:
		raise ContractViolation(f"speaker mass over all messages deviates from 1 by {drift:.3g}")
	logger.debug(f"Tabular speaker mass drift {drift:.3g}")
	heads = listener.head_log_probs(batch)
	log_rho = np.zeros((len(messages), space.size))
	for k, head in enumerate(heads):
		log_rho += head[:, attrs[:, k]]
	if prior is None:
		prior = np.full(space.size, 1.0 / space.size)
	return TabularGame(np.asarray(prior) / np.sum(prior), _normalize(table), _normalize(np.exp(log_rho))), messages


def uniform_prior_on(indices: Sequence[int], size: int) -> np.ndarray:
	prior = np.zeros(size)
	prior[np.asarray(indices, dtype=np.int64)] = 1.0
	return prior / prior.sum()


def dump_game(game: TabularGame) -> str:
	def row(values: np.ndarray) -> str:
		return " ".join(f"{v:.17g}" for v in values)

	lines = [f"tabular-game v1 X={game.n_objects} M={game.n_messages}", "#prior", row(game.prior), "#speaker"]
	lines.extend(row(r) for r in game.speaker)
	lines.append("#listener")
	lines.extend(row(r) for r in game.listener)
	return "\n".join(lines) + "\n"


def _section_matrix(sections: dict, name: str, n_rows: int, width: int) -> np.ndarray:
	rows = sections[name]
	if len(rows) != n_rows or any(len(row) != width for row in rows):
		raise ArtifactError(f"section #{name} must hold {n_rows} row(s) of {width} numbers")
	return np.asarray(rows, dtype=np.float64)


def load_game(text: str) -> TabularGame:
	lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
	if not lines or not lines[0].startswith("tabular-game v1"):
		raise ArtifactError("not a tabular-game v1 document")
	try:
		dims = dict(tok.split("=") for tok in lines[0].split()[2:])
		n_x, n_m = int(dims["X"]), int(dims["M"])
	except (KeyError, ValueError) as exc:
		raise ArtifactError(f"bad tabular-game header {lines[0]!r}") from exc
	sections: dict = {}
	current = None
	for line in lines[1:]:
		if line.startswith("#"):
			current = line[1:]
			sections[current] = []
			continue
		if current is None:
			raise ArtifactError("tabular-game rows before any section header")
		try:
			sections[current].append([float(v) for v in line.split()])
		except ValueError as exc:
			raise ArtifactError(f"bad number in section {current!r}") from exc
	missing = {"prior", "speaker", "listener"} - {name for name, rows in sections.items() if rows}
	if missing:
		raise ArtifactError(f"tabular-game is missing sections: {', '.join(sorted(missing))}")
	prior = _section_matrix(sections, "prior", 1, n_x)[0]
	speaker = _section_matrix(sections, "speaker", n_x, n_m)
	listener = _section_matrix(sections, "listener", n_m, n_x)
	try:
		return TabularGame(prior, speaker, listener)
	except ContractViolation as exc:
		raise ArtifactError(str(exc)) from exc
