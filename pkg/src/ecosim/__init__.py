"""ecosim: deterministic simulator of evolving service-agent populations
on an adaptive small-world habitat network, with a chi-squared harness
comparing observed application properties against configured request
distributions."""

from ._backend import BACKEND_NAME
from .distributions import DistributionSpec, expected_probabilities, sample
from .driver import (ExperimentConfig, ExperimentSummary, RunResult,
                     figure_config, replicate_figure, run_experiment,
                     run_simulation, validate_config)
from .errors import (ConfigurationError, EcosimError, InvalidInputError,
                     UnservableRequestError)
from .evolution import (EvolutionParams, EvolutionResult, Population,
                        evolve_generation, instantiate_population,
                        run_evolution)
from .habitat import (Edge, Habitat, HabitatNetwork, build_topology, decay,
                      migrate_application, reinforce, sample_neighbor)
from .model import (Agent, Aggregation, Request, Task, is_successful,
                    semantic_distance)
from .rng import DeterministicRng, mix_seed
from .stats import (ChiSquareReport, Histogram, analyze, chi2_cdf,
                    chi2_lower_critical, chi_squared_statistic,
                    regularized_lower_gamma)
from .userbase import (Community, UserProfile, Userbase, assign_users,
                       build_communities)

__version__ = "0.1.0"
