"""Capacity bounds for unital quantum channels from spectral gaps and output 2-norms."""

__version__ = "0.1.0"

from .channels import (KrausChannel, TransferMatrix, WeightOperator, adjoint_apply, apply,
                       depolarizing, dephasing, g_map, identity_channel, is_unital, named_channel,
                       p_pi_map, tensor_power, transfer_matrix, unitary_mixture)
from .capacity import (CapacityReport, FidelityDecay, capacity_report, codespace_bound_rhs,
                       coherent_information, fidelity_decay, q_lower_lsd, q_upper_2norm,
                       q_upper_unital, zero_error_upper)
from .config import AscentOptions, RunConfig, derive_stream
from .expanders import (EnsembleReport, ExpanderSample, ensemble_survey,
                        expander_capacity_report, multiplicativity_survey, sample_hastings)
from .norms import (MultiplicativityReport, NormEstimate, g_map_2norm, lemma_2norm_bound,
                    multiplicativity_report, output_2norm, output_2norm_tensor)
from .recovery import (CodeSpec, FidelityEstimate, apply_noise_to_code, average_fidelity,
                       check_lemma3, petz_recovery, random_code, verify_bk)
from .spectral import SpectralReport, check_block_structure, is_expander, second_singular_value
