"""Cognitive radar simulator: a SARSA agent steering a transmissive RIS
for multi-target CFAR detection."""

__version__ = "0.1.0"

from .agent import QTable, compute_reward, compute_state, sarsa_update, select_action, top_bins
from .beamformer import (BeamProblem, SolverParams, align_single_bin, beampattern,
                         beampattern_map, make_beam_problem, optimize_phases)
from .detector import (DetectionResult, amf_statistic, covariance_inverse, detect,
                       marcum_q1, theoretical_pd, threshold)
from .geometry import (SpatialGrid, TrisArray, UpaSpec, make_grid, make_tris,
                       nearfield_w, steering_matrix, steering_vector)
from .harness import (EpisodeConfig, MonteCarloResult, RlParams, RunResult,
                      calibrate_pfa, monte_carlo, run_episode, sweep_elements)
from .scene import (PhaseConfig, Scenario, Snapshot, Target, channel, channel_map,
                    draw_noise, effective_transmission, random_phases,
                    swerling0_amplitude, synthesize_snapshot)

__all__ = [
    "QTable", "compute_reward", "compute_state", "sarsa_update", "select_action",
    "top_bins", "BeamProblem", "SolverParams", "align_single_bin", "beampattern",
    "beampattern_map", "make_beam_problem", "optimize_phases", "DetectionResult",
    "amf_statistic", "covariance_inverse", "detect", "marcum_q1", "theoretical_pd",
    "threshold", "SpatialGrid", "TrisArray", "UpaSpec", "make_grid", "make_tris",
    "nearfield_w", "steering_matrix", "steering_vector", "EpisodeConfig",
    "MonteCarloResult", "RlParams", "RunResult", "calibrate_pfa", "monte_carlo",
    "run_episode", "sweep_elements", "PhaseConfig", "Scenario", "Snapshot",
    "Target", "channel", "channel_map", "draw_noise", "effective_transmission",
    "random_phases", "swerling0_amplitude", "synthesize_snapshot",
]
