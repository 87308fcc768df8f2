from dataclasses import dataclass, replace


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by the iterative solvers.

    ``tol`` is a relative sup-norm residual.  ``dt`` is the initial step of
    the gradient flows (halved on energy increase, grown by ``dt_grow``
    otherwise).
    """

    tol: float = 1e-8
    max_iter: int = 20000
    dt: float = 0.1
    dt_grow: float = 1.1
    dt_max: float = 1e4
    method: str = "flow"
    seed: int = 0
    # non-existence evidence thresholds for the constrained flow
    diverge_floor: float = -1e6
    diverge_factor: float = 1e3
    energy_slack: float = 1e-12

    def with_(self, **kw):
        return replace(self, **kw)
