"""Numerical rigidity analysis of bar-and-joint frameworks by homotopy continuation."""
from .catalog import load, parse_framework, read_framework
from .errors import (DegenerateDirection, DegenerateSpan, DimensionError, ParseError,
                     RandomizationFailure, RankDeficient, RankTolAmbiguous, RigiscopeError,
                     SingularMatrix, ValidationError)
from .framework import (Framework, MovingFrame, infinitesimal_flexes, lift, moving_frame,
                        project, project_velocity, rigid_motion_basis, rigidity_matrix)
from .pathtrack import PathResult, Status, TrackerSettings, classify_endpoints, track_all
from .rigidity import (DiscreteFlex, EpsRigidityReport, build_critical_system, discrete_flex,
                       eps_local_rigidity, flex_direction, flex_param_homotopy)

__version__ = "0.1.0"
