"""Character calculus for linear cellular automata over finite abelian groups,
with exact harmonic-mixing checks for Bernoulli, Markov and grid MRF measures."""

from .algebra import (Character, Endo, Group, Phase, char_eval, char_rank, endo_adjoint,
                      endo_apply, factorize, is_automorphism, pair)
from .errors import (CapExceededError, ConfigError, GroupMismatchError, HaarlabError,
                     InvalidArgumentError, NotAMemberError, UnsupportedError,
                     WindowOverflowError)
from .kernels import BACKEND
from .lca import (Configuration, Lca, apply_lca, char_power, compose_char, compose_lca,
                  crt_combine, crt_split, diffusion_hypothesis, lca_power, lca_power_coeffs,
                  make_lca)

__version__ = "0.1.0"
