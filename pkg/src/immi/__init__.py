"""Closed-form and Monte Carlo mutual information of index modulations."""

from .channels import ChannelEnsemble, load_channels, rayleigh_ensemble, save_channels
from .closed_form import (
    GibbsKernel,
    SecondOrderTerms,
    gibbs_kernel,
    kernel_for,
    mi_curves,
    mi_first_order,
    mi_second_order,
    mi_second_order_raw,
    second_order_terms,
)
from .linkadapt import McsEntry, McsTable, effective_mi, load_mcs_table, select_mcs
from .model import (
    AugmentedSymbolSet,
    ChannelRealization,
    Constellation,
    SnrPoint,
    augment,
    build_constellation,
    pairwise_sq_distances,
    parse_constellation,
)
from .oracle import MiEstimate, g_integrand, mi_monte_carlo, noise_moments

__version__ = "0.1.0"
