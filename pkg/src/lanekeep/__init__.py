"""Pure pursuit lane keeping with delay-aware tuning.

The package is split by concern:

``lanekeep.track``
    test track geometry, projection and lookahead heading error
``lanekeep.vehicle``
    kinematic bicycle model, steering actuator, speed loop
``lanekeep.controllers``
    PP, PP-D and the PP-VR speed reference
``lanekeep.stability``
    Walton-Marshall critical delay analysis and derivative gain tuning
``lanekeep.estimator``
    heading error sensor model and labelled pose dataset generator
``lanekeep.harness``
    closed-loop scenarios, metrics and configuration comparison
"""

from .controllers import PPDConfig, PPVRConfig, pp_steer, ppd_steer, ppvr_velocity
from .estimator import DatasetConfig, SensorConfig, generate_dataset, sense
from .harness import (ScenarioConfig, SimTrace, compare_configurations, compute_metrics,
                      run_scenario, scenario_from_dict, standard_variants)
from .stability import (StraightLoopParams, critical_delay, delay_free_stable,
                        sweep_critical_delay, tune_kd, wm_critical_delay)
from .track import (PoseG, TrackParams, build_test_track, lhe_global, lle_straight,
                    lookahead_point, point_at, project)
from .vehicle import VehicleParams, VehicleState, step_global, step_local

__version__ = "0.1.0"

__all__ = [
    "PPDConfig", "PPVRConfig", "pp_steer", "ppd_steer", "ppvr_velocity",
    "DatasetConfig", "SensorConfig", "generate_dataset", "sense",
    "ScenarioConfig", "SimTrace", "compare_configurations", "compute_metrics", "run_scenario",
    "scenario_from_dict", "standard_variants",
    "StraightLoopParams", "critical_delay", "delay_free_stable", "sweep_critical_delay",
    "tune_kd", "wm_critical_delay",
    "PoseG", "TrackParams", "build_test_track", "lhe_global", "lle_straight",
    "lookahead_point", "point_at", "project",
    "VehicleParams", "VehicleState", "step_global", "step_local",
]
