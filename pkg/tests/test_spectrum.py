import numpy as np
import pytest

from hartree6 import (
    DomainError,
    NumericalError,
    RadialFunction,
    UsageError,
    classify_kernel,
    quadratic_form,
    residual_norm,
    solve_spectrum,
    weighted_inner_product,
)
import hartree6.spectrum as spectrum_mod
from hartree6.groundstate import eval_lambda_omega, eval_omega, eval_omega_prime
from hartree6.spectrum import localization, sign_changes


@pytest.mark.parametrize("k", [0, 1, 2, 4])
def test_result_invariants(grid, spectra, k):
    res = spectra(k)
    assert len(res) == 6
    assert np.all(np.diff(res.eigenvalues) >= 0)
    assert np.all(res.residuals <= 1e-6)
    for v in res.eigenvectors:
        assert weighted_inner_product(v, v) == pytest.approx(1.0, abs=1e-10)
    assert res.max_imag <= 1e-6


def test_k0_ground_state_below_rayleigh_bound(grid, spectra):
    assert spectra(0).eigenvalues[0] <= -4.8


@pytest.mark.xfail(strict=True, reason="the closed-form Rayleigh quotient is -4.8, so it gives no "
                   "bound at -48; the computed ground energy is about -13.57")
def test_k0_ground_state_below_quoted_bound(spectra):
    assert spectra(0).eigenvalues[0] <= -48.0


def test_k1_zero_mode(grid, spectra):
    res = spectra(1)
    dw = grid.sample(eval_omega_prime)
    dw = dw / np.sqrt(weighted_inner_product(dw, dw))
    near = [i for i, lam in enumerate(res.eigenvalues) if abs(lam) <= 1e-6]
    assert near
    best = max(abs(weighted_inner_product(res.eigenvectors[i], dw)) for i in near)
    assert best >= 0.999


def test_k2_nonnegative(spectra):
    assert spectra(2).eigenvalues[0] >= -1e-6


def test_residual_norm_examples(grid, ops):
    assert residual_norm(ops(0), grid.sample(eval_lambda_omega), 0.0) <= 1e-6
    assert residual_norm(ops(1), grid.sample(eval_omega_prime), 0.0) <= 1e-6
    w = grid.sample(eval_omega)
    rq = quadratic_form(ops(0), w) / weighted_inner_product(w, w)
    assert residual_norm(ops(0), w, rq) > 0.01


def test_residual_norm_errors(grid, grid64, ops):
    with pytest.raises(DomainError):
        residual_norm(ops(0), RadialFunction(grid, np.zeros(grid.n)), 0.0)
    with pytest.raises(UsageError):
        residual_norm(ops(0), grid64.sample(eval_omega), 0.0)


def test_classify_kernel_examples(spectra):
    c1 = classify_kernel(spectra(1), 1e-6, 0.05)
    assert len(c1) == 1 and c1[0].sign_changes == 0
    assert classify_kernel(spectra(2), 1e-6, 0.05) == []
    c0 = classify_kernel(spectra(0), 1e-6, 0.05)
    assert len(c0) == 1 and c0[0].sign_changes == 1
    assert abs(c0[0].eigenvalue) <= 1e-6


def test_classify_kernel_argument_errors(spectra):
    with pytest.raises(UsageError):
        classify_kernel(spectra(1), 0.0, 0.05)
    with pytest.raises(UsageError):
        classify_kernel(spectra(1), 1e-6, 1.0)


def test_box_modes_are_filtered(spectra):
    # near-zero eigenvalues from the discretized continuum carry their mass far out
    res = spectra(3)
    assert np.any(np.abs(res.eigenvalues) <= 1e-6)
    assert np.all(res.localization[np.abs(res.eigenvalues) <= 1e-6] > 0.05)


def test_ground_state_simplicity_and_sign(spectra):
    for k in range(7):
        res = spectra(k)
        if res.eigenvalues[0] < -1e-4:
            assert res.eigenvalues[1] - res.eigenvalues[0] > 1e-4
            assert sign_changes(res.eigenvectors[0].values) == 0


def test_ground_energy_monotone_in_k(spectra):
    lows = [spectra(k).eigenvalues[0] for k in range(7)]
    assert lows[0] < lows[1]
    for a, b in zip(lows[1:], lows[2:]):
        assert a <= b + 1e-6


def test_localized_eigenvectors_are_orthogonal(spectra):
    for k in (0, 1):
        res = spectra(k)
        loc = [i for i in range(len(res)) if res.localization[i] <= 0.05]
        for i in loc:
            for j in range(len(res)):
                if i != j and (j in loc or res.eigenvalues[i] < -1e-4):
                    assert abs(weighted_inner_product(res.eigenvectors[i], res.eigenvectors[j])) <= 1e-8


@pytest.mark.xfail(strict=True, reason="box modes at the continuum edge are right eigenvectors of a "
                   "non-symmetric collocation matrix and overlap at the 1e-2 level")
def test_all_eigenvectors_orthogonal(spectra):
    res = spectra(2)
    V = np.array([v.values for v in res.eigenvectors])
    G = (V * res.eigenvectors[0].grid.weights_r5) @ V.T
    assert np.max(np.abs(G - np.eye(len(res)))) <= 1e-8


def test_determinism(ops, spectra):
    again = solve_spectrum(ops(1), 6)
    np.testing.assert_array_equal(again.eigenvalues, spectra(1).eigenvalues)
    np.testing.assert_array_equal(again.eigenvectors[0].values, spectra(1).eigenvectors[0].values)


def test_num_eigs_bounds(ops, grid):
    with pytest.raises(UsageError):
        solve_spectrum(ops(0), 0)
    with pytest.raises(UsageError):
        solve_spectrum(ops(0), grid.n - 1)


def test_eigensolver_failure(monkeypatch, ops):
    def broken(a):
        n = a.shape[0]
        return np.full(n, np.nan + 0j), np.eye(n)

    monkeypatch.setattr(spectrum_mod.la, "eig", broken)
    with pytest.raises(NumericalError):
        solve_spectrum(ops(0), 3)


def test_helpers(grid):
    assert sign_changes(np.array([1.0, 2.0, -1.0, 1e-12, 3.0])) == 2
    assert localization(grid.sample(eval_omega), 1e9) == 0.0
    assert localization(grid.sample(eval_omega), 0.0) == pytest.approx(1.0)
