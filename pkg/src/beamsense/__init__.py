"""Sensor-assisted beam tracking for 60 GHz indoor links."""

from .errors import BeamSenseError, BoundsError, ConfigError, DomainError, FormatError, StateError
from .harness import (EventKind, SimEvent, SimulationReport, SweepResult, classify_and_identify,
                      run_route, run_rwpm_sweep)
from .mobility import (ActivityProfile, DEFAULT_PROFILES, Route, Trajectory, TrajectoryStep,
                       discretize, discretize_arrays, l_route, random_waypoint, synthesize_trace)
from .prediction import PredictionContext, PredictorKind, predict, predict_sensor, predict_simple, validate_pair
from .propagation import (PowerSample, Scenario, SectorId, best_sector, load_scenario, path_loss,
                          received_power, sector_boresight, tx_gain)
from .sensing import (ActivityClass, ErrorCause, FeatureVector, SensorSample, TrainedClassifier,
                      extract_features, identify_error, knn_classify, train, window)

__version__ = "0.1.0"
