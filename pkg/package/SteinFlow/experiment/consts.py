""" Constants for experiments with SteinFlow (:mod:`SteinFlow.experiment.consts`)
==================================================================================

Adds:
- Get default experiment parameters from ``defaults.yaml``

"""
from pathlib import Path

import yaml

__all__ = [
    "EXPERIMENT_DEFAULTS",
    "METHODS",
    "PARTICLE_METHODS",
    "FLOW_METHODS",
    "DEFAULT_HERMITE_MODES",
]

# EXPERIMENT_DEFAULTS: default parameters for experiments from 'defaults.yaml'
defaults_file = Path(__file__).parent / "config/defaults.yaml"
with open(defaults_file, "r") as file:
    EXPERIMENT_DEFAULTS = yaml.safe_load(file)

PARTICLE_METHODS = ("svgd", "lawgd")
FLOW_METHODS = ("csf_flow", "lawgd_flow")
METHODS = (*PARTICLE_METHODS, *FLOW_METHODS)

DEFAULT_HERMITE_MODES = 150
