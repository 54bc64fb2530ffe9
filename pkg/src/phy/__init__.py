from .link import DetectionReport, LinkState, RxObservation, build_link, design_beamformer, detect, transmit
from .simulate import TrialOutcome, aggregate, random_frames, realize_link, run_trial, simulate_abep
from .theory import abep_theoretical, asep_theoretical

__all__ = [
    "DetectionReport",
    "LinkState",
    "RxObservation",
    "TrialOutcome",
    "abep_theoretical",
    "aggregate",
    "asep_theoretical",
    "build_link",
    "design_beamformer",
    "detect",
    "random_frames",
    "realize_link",
    "run_trial",
    "simulate_abep",
    "transmit",
]
