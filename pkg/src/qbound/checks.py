"""Self-contained invariant suite behind the ``check`` command.

Each check re-derives a structural property from scratch (random instances
where applicable, fixed seeds throughout) and raises ``AssertionError`` on
violation.  A developer-only perturbation hook corrupts the symmetric
division on purpose to demonstrate that the suite is sensitive to it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import measurement, montecarlo, mshot, observables, operators, quantum
from .errors import QBoundError
from .classical import (
    POVM,
    chi2_divergence,
    classical_bound,
    classical_info_matrix,
    optimal_estimator,
    probabilities,
)
from .models import (
    QubitPhaseModel,
    binary_entropy_nats,
    bloch_evolve,
    bloch_to_density,
    entropy_to_bloch_length,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_state(rng, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def _random_hermitian(rng, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return operators.hermitian_part(a)


def _random_qubit_model(rng, min_len=0.2, max_len=0.9) -> QubitPhaseModel:
    vec = rng.normal(size=3)
    vec /= np.linalg.norm(vec)
    # keep a usable rotating component about z
    if np.linalg.norm(vec[:2]) < 0.3:
        vec[0] += 0.5
        vec /= np.linalg.norm(vec)
    return QubitPhaseModel(vec * rng.uniform(min_len, max_len))


def _study_model() -> QubitPhaseModel:
    r = entropy_to_bloch_length(0.6)
    return QubitPhaseModel((0.0, r, 0.0))


def check_omega_division_identity(omega) -> str:
    rng = np.random.default_rng(11)
    worst = 0.0
    for d in (2, 3, 4):
        for _ in range(12):
            rho = _random_state(rng, d)
            x = _random_hermitian(rng, d)
            om = omega(rho, x)
            residual = np.abs(0.5 * (om @ rho + rho @ om) - x).max()
            worst = max(worst, float(residual))
    assert worst <= 1e-9, f"symmetric-division identity residual {worst:.3e} > 1e-9"
    return f"max residual {worst:.2e}"


def check_omega_backend_agreement(omega) -> str:
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(20):
        rho = _random_state(rng, 3)
        x = _random_hermitian(rng, 3)
        dev = np.abs(omega(rho, x) - operators.omega_apply_vectorized(rho, x)).max()
        worst = max(worst, float(dev))
    assert worst <= 1e-9, f"spectral and vectorized backends differ by {worst:.3e}"
    return f"max backend gap {worst:.2e}"


def check_omega_linearity(omega) -> str:
    rng = np.random.default_rng(13)
    rho = _random_state(rng, 3)
    x, y = _random_hermitian(rng, 3), _random_hermitian(rng, 3)
    lhs = omega(rho, 0.7 * x - 1.3 * y)
    rhs = 0.7 * omega(rho, x) - 1.3 * omega(rho, y)
    dev = float(np.abs(lhs - rhs).max())
    assert dev <= 1e-10, f"linearity residual {dev:.3e}"
    return f"residual {dev:.2e}"


def check_omega_trace_symmetry(omega) -> str:
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(10):
        rho = _random_state(rng, 4)
        x, y = _random_hermitian(rng, 4), _random_hermitian(rng, 4)
        lhs = np.trace(x @ omega(rho, y))
        rhs = np.trace(y @ omega(rho, x))
        worst = max(worst, float(abs(lhs - rhs)))
    assert worst <= 1e-10, f"inner-product symmetry residual {worst:.3e}"
    return f"max residual {worst:.2e}"


def check_bloch_length_preserved() -> str:
    rng = np.random.default_rng(15)
    worst = 0.0
    for _ in range(50):
        r0 = rng.normal(size=3)
        r0 *= rng.uniform(0, 1) / np.linalg.norm(r0)
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        out = bloch_evolve(r0, n, rng.uniform(-np.pi, np.pi))
        worst = max(worst, abs(float(np.linalg.norm(out)) - float(np.linalg.norm(r0))))
    assert worst <= 1e-12, f"rotation changed Bloch length by {worst:.3e}"
    return f"max length drift {worst:.2e}"


def check_qubit_spectrum_invariant() -> str:
    model = _study_model()
    base = np.linalg.eigvalsh(model.evaluate(0.0))
    worst = 0.0
    for th in np.linspace(-3.0, np.pi, 7):
        worst = max(worst, float(np.abs(np.linalg.eigvalsh(model.evaluate(th)) - base).max()))
    assert worst <= 1e-12, f"spectrum drift {worst:.3e}"
    return f"max drift {worst:.2e}"


def check_derivatives_traceless() -> str:
    model = _study_model()
    worst = 0.0
    for k in (1, 2, 3):
        worst = max(worst, abs(float(np.trace(model.derivative(0.3, k)).real)))
    assert worst <= 1e-8, f"derivative trace {worst:.3e}"
    return f"max |trace| {worst:.2e}"


def check_entropy_roundtrip() -> str:
    worst = 0.0
    for r in np.linspace(0.0, 1.0, 21):
        worst = max(worst, abs(entropy_to_bloch_length(binary_entropy_nats(r)) - r))
    assert worst <= 1e-10, f"entropy inversion residual {worst:.3e}"
    return f"max residual {worst:.2e}"


def check_builder_aliasing() -> str:
    model = _study_model()
    a = observables.abel_set(model, 0.0, [0.5, -1.0], 0)
    b = observables.barankin_set(model, 0.0, [0.5, -1.0])
    assert all(np.array_equal(x.operator, y.operator) and x.lam == y.lam
               for x, y in zip(a.entries, b.entries)), "hybrid set != pure shifted-state set"
    c = observables.abel_set(model, 0.0, [], 2)
    d = observables.bhattacharyya_set(model, 0.0, 2)
    assert all(np.array_equal(x.operator, y.operator) and x.lam == y.lam
               for x, y in zip(c.entries, d.entries)), "hybrid set != pure derivative set"
    return "entrywise equal"


def check_support_regularization() -> str:
    pure = QubitPhaseModel((0.0, 1.0, 0.0))
    obs = observables.barankin_set(pure, 0.0, [1.0])
    rho = pure.evaluate(0.0)
    _, diag = observables.validate_support(obs, rho, regularize=True)
    assert diag.max_violation > 0.0, "expected a kernel-weight violation for a pure state"
    assert diag.regularized_state is not None
    _, diag2 = observables.validate_support(obs, diag.regularized_state)
    assert diag2.max_violation <= 1e-10, "regularized state still violates the support condition"
    return f"violation {diag.max_violation:.2e} -> {diag2.max_violation:.2e}"


def check_classical_bound_monotone() -> str:
    rng = np.random.default_rng(16)
    for _ in range(20):
        n_out = 6
        p = rng.dirichlet(np.ones(n_out))
        g = rng.normal(size=(3, n_out))
        lam = rng.normal(size=3)
        c_full = (g / p) @ g.T
        vals = []
        for n in (2, 3):
            from .classical import InformationMatrix

            info = InformationMatrix(matrix=c_full[:n, :n], kind="classical")
            vals.append(classical_bound(info, lam[:n], np.zeros(n)).value)
        assert vals[1] >= vals[0] - 1e-8, f"bound decreased when adding a constraint: {vals}"
    return "20 random instances"


def check_chi2_matches_diagonal() -> str:
    model = _study_model()
    rho = model.evaluate(0.0)
    povm = POVM(elements=(bloch_to_density((0.6, 0.0, 0.8)),
                          np.eye(2) - bloch_to_density((0.6, 0.0, 0.8))))
    lam = 1.2
    obs = observables.barankin_set(model, 0.0, [lam])
    c = classical_info_matrix(povm, obs, rho)
    chi2 = chi2_divergence(probabilities(povm, model.evaluate(lam)), probabilities(povm, rho))
    dev = abs(c.matrix[0, 0] - 1.0 - chi2)
    assert dev <= 1e-10, f"diagonal / divergence mismatch {dev:.3e}"
    return f"mismatch {dev:.2e}"


def check_estimator_attains_bound() -> str:
    rng = np.random.default_rng(17)
    model = _study_model()
    rho = model.evaluate(0.0)
    worst = 0.0
    for trial in range(10):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        e1 = bloch_to_density(axis)
        povm = POVM(elements=(e1, np.eye(2) - e1))
        # two outcomes support at most two constraints (base included)
        if trial % 2:
            obs = observables.barankin_set(model, 0.0, [1.0])
        else:
            obs = observables.bhattacharyya_set(model, 0.0, 1)
        info = classical_info_matrix(povm, obs, rho)
        lam, f = obs.lambdas, obs.f_vector
        bound = classical_bound(info, lam, f)
        values = optimal_estimator(povm, obs, info, lam, f, rho)
        _, var = montecarlo.exact_moments(probabilities(povm, rho), values)
        worst = max(worst, abs(var - bound.value))
    assert worst <= 1e-9, f"estimator variance misses the bound by {worst:.3e}"
    return f"max gap {worst:.2e}"


def check_quantum_chi2_dominates() -> str:
    rng = np.random.default_rng(18)
    worst = -np.inf
    for _ in range(40):
        model = _random_qubit_model(rng)
        lam = rng.uniform(0.2, np.pi)
        qchi = quantum.quantum_chi2(model, 0.0, lam)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        e1 = bloch_to_density(axis)
        povm = POVM(elements=(e1, np.eye(2) - e1))
        chi = chi2_divergence(probabilities(povm, model.evaluate(lam)),
                              probabilities(povm, model.evaluate(0.0)))
        worst = max(worst, chi - qchi)
    assert worst <= 1e-9, f"a measured divergence exceeded the quantum value by {worst:.3e}"
    return f"max excess {worst:.2e}"


def check_chi2_qfi_limit() -> str:
    model = _study_model()
    f1 = quantum.qcrb(model, 0.0).diagnostics["qfi"]
    errs = [abs(quantum.quantum_chi2(model, 0.0, lam) / lam ** 2 - f1)
            for lam in (1e-2, 1e-3)]
    assert errs[1] <= errs[0] * 0.05, f"no quadratic decay: {errs}"
    return f"errors {errs[0]:.2e} -> {errs[1]:.2e}"


def check_base_row_consistency() -> str:
    model = _study_model()
    rho = model.evaluate(0.0)
    obs = observables.abel_set(model, 0.0, [0.9, 2.0], 0)
    lam, f = obs.lambdas, obs.f_vector
    direct = quantum.bound_from_matrix(quantum.quantum_info_matrix(obs, rho), lam, f)
    base = observables.TestObservable(operator=rho, lam=0.0,
                                      kind=observables.ObservableKind.BASE_STATE)
    augmented = observables.TestObservableSet(entries=(base,) + obs.entries, theta=0.0)
    info_aug = quantum.quantum_info_matrix(augmented, rho)
    aug = quantum.bound_from_matrix(info_aug, np.concatenate(([0.0], lam)),
                                    np.zeros(len(lam) + 1))
    dev = abs(direct.value - aug.value)
    assert dev <= 1e-9, f"explicit base row changes the bound by {dev:.3e}"
    return f"gap {dev:.2e}"


def check_hierarchy_monotone() -> str:
    rng = np.random.default_rng(19)
    cfg = quantum.OptimizerConfig(grid_points=128, refine_iterations=30,
                                  coarse_grid_points=24, refine_candidates=4,
                                  refine_sweeps=1)
    for _ in range(3):
        model = _random_qubit_model(rng)
        v01 = quantum.sup_over_testpoints(model, 0.0, 0, 1, cfg).value
        v10 = quantum.sup_over_testpoints(model, 0.0, 1, 0, cfg).value
        v11 = quantum.sup_over_testpoints(model, 0.0, 1, 1, cfg).value
        v20 = quantum.sup_over_testpoints(model, 0.0, 2, 0, cfg).value
        assert v01 <= v10 + 1e-8 and v10 <= v11 + 1e-8 and v10 <= v20 + 1e-8, \
            f"hierarchy violated: {v01}, {v10}, {v11}, {v20}"
    return "3 random models"


def check_mshot_oracle() -> str:
    rng = np.random.default_rng(20)
    model = _study_model()
    worst = 0.0
    for m in (2, 3):
        ctx = mshot.MShotContext(model=model, m=m, theta=0.0)
        rho_m = operators.tensor_power(model.evaluate(0.0), m)
        for _ in range(4):
            lk, ll = rng.uniform(-np.pi, np.pi, size=2)
            gk = operators.tensor_power(model.evaluate(lk), m)
            gl = operators.tensor_power(model.evaluate(ll), m)
            brute = float(np.trace(gk @ operators.omega_apply(rho_m, gl)).real)
            worst = max(worst, abs(mshot.qba_entry_mshot(ctx, lk, ll) - brute))
    assert worst <= 1e-9, f"closed form deviates from the dense oracle by {worst:.3e}"
    return f"max deviation {worst:.2e}"


def check_mshot_additivity() -> str:
    model = _study_model()
    f1 = quantum.qcrb(model, 0.0).diagnostics["qfi"]
    worst = 0.0
    for m in (2, 3):
        ctx = mshot.MShotContext(model=model, m=m, theta=0.0)
        worst = max(worst, abs(mshot.qbh11_mshot(ctx) - m * f1))
    assert worst <= 1e-9, f"additivity residual {worst:.3e}"
    return f"max residual {worst:.2e}"


def check_saturation_study_qubit() -> str:
    model = _study_model()
    rho = model.evaluate(0.0)
    obs = observables.barankin_set(model, 0.0, [np.pi])
    povm, a, info = measurement.saturating_measurement(obs, rho)
    report = measurement.saturation_check(povm, obs, rho, a, obs.lambdas, obs.f_vector)
    assert report.condition_i_residual <= 1e-8, f"condition (i) {report.condition_i_residual:.3e}"
    assert report.condition_iii_residual <= 1e-8, f"condition (iii) {report.condition_iii_residual:.3e}"
    assert abs(report.classical_equals_quantum_gap) <= 1e-7, \
        f"classical/quantum gap {report.classical_equals_quantum_gap:.3e}"
    return f"gap {report.classical_equals_quantum_gap:.2e}"


def check_povm_projective() -> str:
    model = _study_model()
    rho = model.evaluate(0.0)
    obs = observables.bhattacharyya_set(model, 0.0, 1)
    povm, _, _ = measurement.saturating_measurement(obs, rho)
    worst = 0.0
    for i, e in enumerate(povm.elements):
        worst = max(worst, float(np.abs(e @ e - e).max()))
        for j, other in enumerate(povm.elements):
            if i != j:
                worst = max(worst, float(np.abs(e @ other).max()))
    assert worst <= 1e-9, f"projectivity residual {worst:.3e}"
    return f"max residual {worst:.2e}"


def check_montecarlo_reproducible() -> str:
    model = _study_model()
    rho = model.evaluate(0.0)
    obs = observables.bhattacharyya_set(model, 0.0, 1)
    povm, _, _ = measurement.saturating_measurement(obs, rho)
    run1 = montecarlo.sample(povm, rho, 5000, seed=42)
    run2 = montecarlo.sample(povm, rho, 5000, seed=42)
    assert np.array_equal(run1.outcomes, run2.outcomes), "same seed produced different counts"
    return f"counts {run1.outcomes.tolist()}"


def check_estimator_exact_variance() -> str:
    model = _study_model()
    rho = model.evaluate(0.0)
    obs = observables.bhattacharyya_set(model, 0.0, 1)
    povm, a, info = measurement.saturating_measurement(obs, rho)
    lam, f = obs.lambdas, obs.f_vector
    c = classical_info_matrix(povm, obs, rho)
    values = optimal_estimator(povm, obs, c, lam, f, rho)
    _, var = montecarlo.exact_moments(probabilities(povm, rho), values)
    bound = quantum.bound_from_matrix(quantum.quantum_info_matrix(obs, rho), lam, f)
    dev = abs(var - bound.value)
    assert dev <= 1e-9, f"infinite-sample variance misses the bound by {dev:.3e}"
    return f"gap {dev:.2e}"


_OMEGA_CHECKS = {
    "omega-symmetric-division-identity": check_omega_division_identity,
    "omega-backend-agreement": check_omega_backend_agreement,
    "omega-linearity": check_omega_linearity,
    "omega-inner-product-symmetry": check_omega_trace_symmetry,
}

_PLAIN_CHECKS = {
    "bloch-length-preserved": check_bloch_length_preserved,
    "qubit-spectrum-invariant": check_qubit_spectrum_invariant,
    "derivatives-traceless": check_derivatives_traceless,
    "entropy-roundtrip": check_entropy_roundtrip,
    "builder-aliasing": check_builder_aliasing,
    "support-regularization": check_support_regularization,
    "classical-bound-monotone": check_classical_bound_monotone,
    "chi2-matches-diagonal": check_chi2_matches_diagonal,
    "estimator-attains-bound": check_estimator_attains_bound,
    "quantum-chi2-dominates": check_quantum_chi2_dominates,
    "chi2-qfi-limit": check_chi2_qfi_limit,
    "base-row-consistency": check_base_row_consistency,
    "hierarchy-monotone": check_hierarchy_monotone,
    "mshot-matches-oracle": check_mshot_oracle,
    "mshot-additivity": check_mshot_additivity,
    "saturation-study-qubit": check_saturation_study_qubit,
    "povm-projective": check_povm_projective,
    "montecarlo-reproducible": check_montecarlo_reproducible,
    "estimator-exact-variance": check_estimator_exact_variance,
}


def _perturbed_omega(rho, x, tol=operators.NULL_TOL):
    # deliberately wrong: used only by the developer mutation hook
    return operators.omega_apply(rho, x, tol) + 1e-6 * np.eye(rho.shape[0])


def run_checks(name_filter: Optional[str] = None,
               perturb: Optional[str] = None) -> list:
    """Run the invariant suite; returns one result per check."""
    omega: Callable = _perturbed_omega if perturb == "omega" else operators.omega_apply
    results = []
    for name, fn in list(_OMEGA_CHECKS.items()) + list(_PLAIN_CHECKS.items()):
        if name_filter and name_filter not in name:
            continue
        try:
            detail = fn(omega) if name in _OMEGA_CHECKS else fn()
            results.append(CheckResult(name=name, passed=True, detail=detail))
        except (AssertionError, QBoundError) as exc:
            results.append(CheckResult(name=name, passed=False, detail=str(exc)))
    return results
