"""Blind interference alignment for indoor optical wireless networks."""

from ._accel import BACKEND
from .channel import ChannelSet, EmitterModel, build_channel_set, los_gain, mode_condition_number
from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .geometry import (AccessPoint, DetectorConfig, Room, UserTerminal, place_aps_grid, place_users_uniform,
                       pyramid_detector, pyramid_orientations)
from .rate import NoiseModel, RateReport, bia_user_rate, evaluate_network, ici_power
from .supersymbol import (ModeSchedule, block_lengths, build_schedule, coherence_feasible, sum_dof,
                          verify_decodability)
from .topology import Cluster, Topology, associate_aps, kmeans_users, nc_partition, uc_topology

__version__ = "0.1.0"
