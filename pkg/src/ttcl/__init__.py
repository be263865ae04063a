"""Learning qualitative and quantitative temporal constraints from bimanual demonstrations."""

from .apkm import ActionPairKeypointModel, FitConfig, build_all, build_apkm
from .fuzzy import FuzzyAllenProfile, FuzzyConfig, fuzzy_allen
from .mixture import GaussianMixture, fit_best, fit_em
from .pipeline import TaskModel, learn
from .solver import SolverConfig, SttcSet, infer_sttcs, path_consistency
from .ssttc import Ssttc, extract_ssttcs, necessary_channels, plan_bimanual
from .temporal import Action, ActionObservation, AllenRelation, Demonstration, PointRelation, TimeInterval

__version__ = "0.1.0"
