"""Lane-topology agent selection and physical attention for trajectory prediction."""

from .attention import AttentionMatrix, CoefficientConfig, attention_matrix, closeness_index
from .encoder import EncoderWeights, encode_interactions
from .errors import (ConfigurationError, DegenerateGeometryError, InvalidInputError,
                     InvariantViolation, SchemaError, TrajInteractError)
from .evaluation import (PredictionSet, min_ade, min_fde, predict_ca, predict_cv, rmse,
                         rmse_by_horizon, total_loss)
from .geometry import ca_propagate, clamp_tau, closest_approach_time, closest_distance
from .ingestion import DatasetConfig, load_trajectories, window_scenes
from .lane_graph import Lane, LaneGraph, map_point_to_lane
from .selection import (Frame, InteractionTensor, NeighborSet, SceneHistory, assign_lanes,
                        build_interaction_tensor, select_neighbors)
from .state import AgentState, LaneAssignment, Vec2
from .synth import SynthSpec, overtake_scenario, synthesize

__version__ = "0.1.0"
