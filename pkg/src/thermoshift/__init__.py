"""Freezing phase transitions of the distance potential on subshifts of finite type."""

from .errors import (BudgetExceeded, NumericError, ParseError, ThermoshiftError,
                     ValidationError)
from .induced import (ReturnWord, accidents, classify, decompose, enumerate_return_words,
                      is_return_word, multiplicities, transfer_counts)
from .kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .potential import PotentialParams, birkhoff_sum, phi, phi_of_delta, run_sum
from .pressure import (LambdaValue, PressureCurve, find_t_c, integral_phi, lambda_direct,
                       lambda_grouped, lambda_value, pressure_at, pressure_curve,
                       sandwich_check, variational_probe)
from .problem import Problem
from .series import zeta_tail
from .sft import (CylinderSpec, DeltaValue, SftSpec, build_sft, count_words, delta,
                  make_cylinder, mixing_index)
from .spectral import (MarkovMeasure, bernoulli, cylinder_measure, entropy, markov_entropy,
                       parry_measure, perron_data, random_markov_measure)

__version__ = "0.1.0"
