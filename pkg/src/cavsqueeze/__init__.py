"""Squeezed-state engineering in a high-Q cavity with a driven three-level atom."""

__version__ = "0.1.0"

from .atomfield import (  # noqa: E402
    AtomFieldState,
    EffectiveParams,
    PhysicalParams,
    compare_effective,
    derive_effective,
    effective_hamiltonian,
    full_hamiltonian,
    quadratic_hamiltonian,
    raman_hamiltonian,
)
from .fock import (  # noqa: E402
    CavityState,
    FieldOperator,
    FockSpace,
    annihilation,
    coherent_state,
    creation,
    fock_state,
    make_space,
    propagator_static,
    propagator_td,
)
from .gates import (  # noqa: E402
    displacement,
    fidelity,
    min_variance,
    squeeze_dynamic,
    squeeze_static,
    wigner,
)
from .protocols import (  # noqa: E402
    CatSpec,
    ladder_coefficients,
    optimal_time,
    pipeline_sdns,
    pipeline_sscs,
    prepare_cat,
    run_ladder,
    transfer_probability,
)

__all__ = [
    "__version__",
    "AtomFieldState",
    "EffectiveParams",
    "PhysicalParams",
    "compare_effective",
    "derive_effective",
    "effective_hamiltonian",
    "full_hamiltonian",
    "quadratic_hamiltonian",
    "raman_hamiltonian",
    "CavityState",
    "FieldOperator",
    "FockSpace",
    "annihilation",
    "coherent_state",
    "creation",
    "fock_state",
    "make_space",
    "propagator_static",
    "propagator_td",
    "displacement",
    "fidelity",
    "min_variance",
    "squeeze_dynamic",
    "squeeze_static",
    "wigner",
    "CatSpec",
    "ladder_coefficients",
    "optimal_time",
    "pipeline_sdns",
    "pipeline_sscs",
    "prepare_cat",
    "run_ladder",
    "transfer_probability",
]
