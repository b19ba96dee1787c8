"""Finite-difference solvers and checks for Dirichlet problems with superlinear convection.

The model problem is

    -div(M grad u) + mu u = -div(h(u) E) + f   in a box,   u = 0 on its boundary,

with ``h`` superlinear.  Submodules:

``nonlinearity``  families of ``h`` and their transforms ``H``, ``phi``
``radial``        the radially symmetric problem and its existence threshold
``mesh``          grids, fields, operator assembly, discrete norms
``solver``        truncated Picard ladder and the certified fixed-point map
``verify``        decay, L1, comparison and necessary-condition checks
``io``, ``cli``   JSON/CSV formats and the ``supconv`` command
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CertificateNotSatisfied,
    DomainError,
    EllipticityError,
    IndeterminateTail,
    InvariantBallViolation,
    LinearSolveFailure,
    QuadratureFailure,
    RootBracketFailure,
    SingularOperator,
    SupconvError,
)
from .mesh import Grid, MatrixField, ScalarField, VectorField  # noqa: E402
from .nonlinearity import (  # noqa: E402
    Growth,
    GrowthVerdict,
    NonlinearitySpec,
    blowup_integral,
    classify_growth,
    eval_H,
    eval_h,
    eval_phi,
    truncate_h,
)
from .problems import radial_slab_problem  # noqa: E402
from .radial import (  # noqa: E402
    Existence,
    RadialProblem,
    RadialSolution,
    analytic_tan,
    analytic_tanh,
    blowup_time,
    existence_verdict,
    solve_radial,
)
from .solver import (  # noqa: E402
    ProblemSpec,
    SolveReport,
    SolverConfig,
    Verdict,
    fixed_point_solve,
    invariant_ball,
    picard_solve,
    smallness_certificate,
    solve,
)
