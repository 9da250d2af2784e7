"""Subsampling-annealed inference for collapsed Pitman-Yor mixture models."""
from .bench import compare_strategies, heldout_log_score, normalize_scores
from .components import BetaBernoulli, ComponentSuffStats, Datum, DirichletCategorical, NormalInvChiSq
from .data import CvSplit, Dataset, ingest_csv, synth_dataset
from .hyper import HyperGrid, gibbs_hyper_step
from .mixture import NEW_CLUSTER, PartitionState, PitmanYor
from .schedules import Action, AnnealSchedule, Strategy, build, run, validate

__all__ = [
    "Action", "AnnealSchedule", "BetaBernoulli", "ComponentSuffStats", "CvSplit", "Dataset", "Datum",
    "DirichletCategorical", "HyperGrid", "NEW_CLUSTER", "NormalInvChiSq", "PartitionState", "PitmanYor",
    "Strategy", "build", "compare_strategies", "gibbs_hyper_step", "heldout_log_score", "ingest_csv",
    "normalize_scores", "run", "synth_dataset", "validate",
]
