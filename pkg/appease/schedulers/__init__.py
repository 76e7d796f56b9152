from typing import Any, Mapping, Optional

import confidence

from appease.errors import ConfigurationError
from appease.utils import script_helper
from .policy import SchedulerPolicy
from .rr import RoundRobin
from .mlfq import MultilevelFeedbackQueue
from .fairshare import FairShare, cpu_share, nice_to_weight
from .load import LoadEstimator, update_load
from .rbpe import DEFAULT_TABLE, EpplEntry, FairShareRBPE, RbpeRow, rbpe_decay, rbpe_lookup, rbpe_on_request, \
    table_from_config
from .appeasement import Appeasement

POLICIES = {
    'rr': RoundRobin,
    'mlfq': MultilevelFeedbackQueue,
    'fairshare': FairShare,
    'fairshare_rbpe': FairShareRBPE,
    'appeasement': Appeasement,
}


def get_policy(name: str):
    if name is None:
        raise ConfigurationError("no policy kind given")
    name = name.replace("-", "_").lower()  # normalize name
    if name not in POLICIES:
        raise ConfigurationError(f"unknown policy kind: {name}")
    return POLICIES[name]


def _setting(params: Mapping[str, Any], config: confidence.Configuration, section: str, key: str):
    if key in params:
        return params[key]
    return config.get(f"{section}.{key}", default=None)


def _given(**kwargs):
    return {key: value for key, value in kwargs.items() if value is not None}


def _required(params: Mapping[str, Any], config: confidence.Configuration, section: str, key: str):
    value = _setting(params, config, section, key)
    if value is None:
        raise ConfigurationError(f"missing setting {section}.{key}")
    return value


def _fairshare_args(params: Mapping[str, Any], config: confidence.Configuration):
    return _given(
        sch_lat=_required(params, config, 'fairshare', 'sch_lat_us'),
        sleeper_threshold=_setting(params, config, 'fairshare', 'sleeper_threshold_us'),
        min_granularity=_setting(params, config, 'fairshare', 'min_granularity_us'),
    )


def create_policy(kind: str, params: Optional[Mapping[str, Any]] = None,
                  config: Optional[confidence.Configuration] = None) -> SchedulerPolicy:
    """
    Instantiates a scheduling policy by kind. Parameters missing from
    `params` are taken from the configuration.

    :param kind: one of the keys of `POLICIES` (dashes are accepted)
    :param params: policy parameters as given in a scenario file
    :param config: configuration holding the defaults
    :return: a fresh policy instance
    """
    policy_cls = get_policy(kind)
    params = dict(params or {})
    params.pop('kind', None)
    if config is None:
        config = script_helper.load_config()

    if policy_cls is RoundRobin:
        return RoundRobin(_required(params, config, 'rr', 'quantum_us'))
    if policy_cls is MultilevelFeedbackQueue:
        return MultilevelFeedbackQueue(_required(params, config, 'mlfq', 'levels'),
                                       _required(params, config, 'mlfq', 'quantum_us'))
    if policy_cls is FairShare:
        return FairShare(**_fairshare_args(params, config))
    if policy_cls is FairShareRBPE:
        table = _setting(params, config, 'rbpe', 'table')
        return FairShareRBPE(
            **_fairshare_args(params, config),
            table=DEFAULT_TABLE if table is None else table_from_config(table),
            **_given(
                decay_sample_period=_setting(params, config, 'rbpe', 'decay_sample_period_us'),
                load_sample_period=_setting(params, config, 'rbpe', 'load_sample_period_us'),
                initial_avenrun=_setting(params, config, 'rbpe', 'initial_avenrun'),
                warm_start=_setting(params, config, 'rbpe', 'warm_start'),
            ),
        )
    # appeasement
    fallback = FairShare(**_fairshare_args(params.get('fallback') or {}, config))
    return Appeasement(fallback,
                       alpha=params.get('alpha'),
                       bootstrap_u=_setting(params, config, 'appeasement', 'bootstrap_u_us'))
