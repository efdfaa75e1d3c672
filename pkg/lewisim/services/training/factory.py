from __future__ import annotations

from typing import Dict

import numpy as np

from lewisim.autodiff.layers import Module
from lewisim.autodiff.optim import Adam
from lewisim.domain.agents.entities import Channel
from lewisim.domain.agents.policies import DiscriminationListener, ListenerPolicy, SpeakerPolicy
from lewisim.domain.env.entities import ObjectSpace, ObjectSpaceSpec
from lewisim.schemas.run_config import AgentConfig, RunConfig


def object_space_of(config: RunConfig) -> ObjectSpace:
	return ObjectSpace(ObjectSpaceSpec(tuple(config.space.cardinalities)))


def channel_of(config: RunConfig) -> Channel:
	return Channel(vocab_size=config.channel.vocab_size, max_len=config.channel.max_len)


def build_speaker(config: RunConfig, rng: np.random.Generator) -> SpeakerPolicy:
	reg = config.speaker.regularizer
	return SpeakerPolicy(
		object_space_of(config).spec, channel_of(config), config.speaker.hidden_size, rng,
		layer_norm=reg.layer_norm, dropout=reg.dropout,
	).eval()


def build_listener(config: RunConfig, rng: np.random.Generator):
	reg = config.listener.regularizer
	spec, channel = object_space_of(config).spec, channel_of(config)
	if config.game.kind == "discrimination":
		return DiscriminationListener(
			spec, channel, config.listener.hidden_size, config.game.embed_dim, rng,
			layer_norm=reg.layer_norm, dropout=reg.dropout,
		).eval()
	return ListenerPolicy(spec, channel, config.listener.hidden_size, rng, layer_norm=reg.layer_norm, dropout=reg.dropout).eval()


def build_probe_listener(config: RunConfig, rng: np.random.Generator) -> ListenerPolicy:
	"""Same architecture as the reconstruction listener, fresh weights, no dropout."""
	return ListenerPolicy(
		object_space_of(config).spec, channel_of(config), config.listener.hidden_size, rng,
		layer_norm=config.listener.regularizer.layer_norm,
	).eval()


def make_optimizer(module: Module, agent: AgentConfig, weight_decay: bool = True) -> Adam:
	return Adam(
		module.parameters(),
		lr=agent.lr,
		beta1=agent.beta1,
		beta2=agent.beta2,
		eps=agent.eps,
		weight_decay=agent.regularizer.weight_decay if weight_decay else 0.0,
	)


def architecture_of(config: RunConfig) -> Dict[str, object]:
	"""Dimensions and flags stored with every checkpoint."""
	return {
		"cardinalities": list(config.space.cardinalities),
		"vocab_size": config.channel.vocab_size,
		"max_len": config.channel.max_len,
		"speaker_hidden": config.speaker.hidden_size,
		"listener_hidden": config.listener.hidden_size,
		"speaker_layer_norm": config.speaker.regularizer.layer_norm,
		"listener_layer_norm": config.listener.regularizer.layer_norm,
		"game": config.game.kind,
		"embed_dim": config.game.embed_dim,
	}
