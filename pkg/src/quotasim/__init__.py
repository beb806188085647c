"""Quota-based debiasing of top-k selections with correlated binary attributes."""

from .analysis import (ExperimentResult, SweepAxis, SweepResult, SweepSpec, aggregate_color_bias,
                       paradox_boundary, quality_sweep, run_single_experiment, sweep)
from .datasets import (DatasetSpec, EmpiricalPopulation, ModelFit, empirical_representation,
                       fit_model_approximation, load_dataset, pearson, simulate_approximation)
from .metrics import FairnessReport, RepresentationReport, fairness, representation_bias
from .population import (BiasParams, Color, Entity, Population, PopulationConfig, Shape,
                         generate_population, group_of, perceived_quality)
from .selection import (QuotaAttribute, ScoreBasis, SelectionResult, SelectionRule,
                        select_top_k, select_with_quota)

__version__ = "0.1.0"
