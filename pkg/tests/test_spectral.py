import numpy as np
import pytest
from scipy.integrate import quad

from bcwave.connecting import connecting_form
from bcwave.errors import ConfigError, DomainError
from bcwave.grid import (
    UniformGrid,
    cumulative_trapezoid,
    inner_inner,
    smooth_random_control,
    zero_control,
)
from bcwave.potentials import ConstantPotential, ZeroPotential
from bcwave.response import apply_response, forward_solution
from bcwave.spectral import (
    eigensolve,
    free_reference,
    smoothed_response_traces,
    spectral_connecting_form,
    spectral_forward,
    spectral_response,
    wave_kernel,
    wave_kernel_antiderivative,
)

CUTOFF = 150
MESH = 1024


@pytest.fixture(scope="module")
def measure_g(gauss):
    return eigensolve(gauss, 4.0, (1, 0, 1, 0), CUTOFF, MESH)


@pytest.fixture(scope="module")
def reference(measure_g):
    return free_reference(measure_g)


def test_free_dirichlet_spectrum():
    m = eigensolve(ZeroPotential(), 1.0, (1, 0, 1, 0), 10, 2048)
    nn = np.arange(1, 11)
    assert np.max(np.abs(m.lam - (nn * np.pi / 2) ** 2) / nn ** 2) < 1e-3
    assert abs(m.lam[0] - np.pi ** 2 / 4) < 1e-3
    # gamma_n = -y_n(0) alternates 1, 0 pattern; beta_n = y_n'(0)
    assert abs(abs(m.gamma[0]) - 1.0) < 1e-3 and abs(m.gamma[1]) < 1e-9
    assert abs(m.beta[0]) < 1e-9 and abs(abs(m.beta[1]) - np.pi) < 1e-2


def test_constant_shift_exact():
    m0 = eigensolve(ZeroPotential(), 1.0, (1, 0, 1, 0), 8, 512)
    mc = eigensolve(ConstantPotential(2.5), 1.0, (1, 0, 1, 0), 8, 512)
    assert np.max(np.abs(mc.lam - m0.lam - 2.5)) < 1e-10
    assert np.max(np.abs(mc.vecs - m0.vecs)) < 1e-10
    assert np.max(np.abs(mc.beta - m0.beta)) < 1e-10


def test_eigensolve_validation():
    with pytest.raises(ConfigError):
        eigensolve(ZeroPotential(), 1.0, (0, 0, 1, 0), 8, 512)
    with pytest.raises(ConfigError):
        eigensolve(ZeroPotential(), 1.0, (1, 0, 1, 0), 8, 511)
    with pytest.raises(ConfigError):
        eigensolve(ZeroPotential(), 1.0, (1, 0, 1, 0), 300, 512)


def test_eigenvalues_strictly_increasing(measure_g):
    assert np.all(np.diff(measure_g.lam) > 0)
    assert measure_g.count == CUTOFF


def test_wave_kernel_values():
    assert wave_kernel(5.0, 0.0) == 0.0
    assert wave_kernel(0.0, 1.7) == pytest.approx(1.7)
    assert wave_kernel(np.pi ** 2, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert wave_kernel(-4.0, 1.0) == pytest.approx(np.sinh(2.0) / 2.0)
    # series branch continuous across the threshold
    assert wave_kernel(1e-9, 2.0) == pytest.approx(wave_kernel(2e-6, 2.0),
                                                   rel=1e-5)


def test_wave_kernel_antiderivative_matches_quad():
    for lam in (-3.0, 0.0, 2.0, 40.0):
        for u in (0.3, 1.1):
            ref, _ = quad(lambda t: wave_kernel(lam, t), 0.0, u)
            assert wave_kernel_antiderivative(lam, u) == pytest.approx(
                ref, abs=1e-10)


def test_zero_control_sums(measure_g):
    grid = UniformGrid(2.0, 64)
    z = zero_control(grid)
    assert np.max(np.abs(spectral_response(measure_g, z, 1.0).value)) == 0.0
    assert spectral_connecting_form(
        measure_g, zero_control(UniformGrid(1.0, 64)),
        zero_control(UniformGrid(1.0, 64))).value == 0.0


def test_smoothed_response_vs_dynamic(gauss, resp128, measure_g, reference):
    grid = resp128.grid
    for seed in range(2):
        f = smooth_random_control(grid, np.random.default_rng(seed))
        dyn = apply_response(resp128, f).control
        dyn_int = np.stack([cumulative_trapezoid(dyn.f1, grid.h),
                            cumulative_trapezoid(dyn.f2, grid.h)])
        sp = smoothed_response_traces(measure_g, f, reference)
        rel = np.linalg.norm(sp.value - dyn_int) / np.linalg.norm(dyn_int)
        assert rel < 0.02
        assert sp.tail < 0.05


def test_measure_substitution(gauss, resp128):
    # different N and different bc leave the smoothed trace unchanged
    grid = resp128.grid
    f = smooth_random_control(grid, np.random.default_rng(3))
    base = None
    for N, bc in ((4.0, (1, 0, 1, 0)), (5.0, (1, 0, 1, 0)),
                  (4.0, (0, 1, 0, 1))):
        m = eigensolve(gauss, N, bc, CUTOFF, MESH)
        tr = smoothed_response_traces(m, f).value
        if base is None:
            base = tr
        else:
            assert np.linalg.norm(tr - base) / np.linalg.norm(base) < 0.02


def test_connecting_form_vs_dynamic(ck128, measure_g):
    grid = UniformGrid(1.0, 128)
    for seed in range(3):
        rng = np.random.default_rng(100 + seed)
        F = smooth_random_control(grid, rng)
        G = smooth_random_control(grid, rng)
        dyn = connecting_form(ck128, F, G)
        sp = spectral_connecting_form(measure_g, F, G)
        assert abs(sp.value - dyn) / abs(dyn) < 0.02


def test_parseval_surrogate(field128, measure_g):
    grid = UniformGrid(1.0, 128)
    F = smooth_random_control(grid, np.random.default_rng(12))
    form = spectral_connecting_form(measure_g, F, F)
    assert form.value >= 0.0
    u = forward_solution(F, field128, 1.0)
    assert form.value == pytest.approx(inner_inner(u, u), rel=0.02)


def test_spectral_forward_free():
    meas = eigensolve(ZeroPotential(), 4.0, (1, 0, 1, 0), CUTOFF, MESH)
    grid = UniformGrid(1.0, 128)
    F = smooth_random_control(grid, np.random.default_rng(5))
    v = spectral_forward(meas, F, 1.0).value
    rev1, rev2 = F.f1[::-1], F.f2[::-1]
    exact1 = 0.5 * (rev1 - rev2)
    exact2 = 0.5 * (-rev1 - rev2)
    mask = np.arange(129) < 127  # 2h-wide wavefront mask
    num = np.sqrt(np.sum((v.a1 - exact1)[mask] ** 2
                         + (v.a2 - exact2)[mask] ** 2))
    den = np.sqrt(np.sum(exact1[mask] ** 2 + exact2[mask] ** 2))
    assert num / den < 0.03


def test_spectral_forward_vs_dynamic(field128, measure_g):
    grid = UniformGrid(1.0, 128)
    F = smooth_random_control(grid, np.random.default_rng(6))
    u = forward_solution(F, field128, 1.0)
    sp = spectral_forward(measure_g, F, 1.0)
    v = sp.value
    mask = np.arange(129) < 127
    num = np.sqrt(np.sum((v.a1 - u.a1)[mask] ** 2
                         + (v.a2 - u.a2)[mask] ** 2))
    den = np.sqrt(np.sum(u.a1[mask] ** 2 + u.a2[mask] ** 2))
    assert num / den < 0.03
    assert sp.tail < 0.05


def test_domain_guards(measure_g):
    long_grid = UniformGrid(9.0, 128)
    f = smooth_random_control(long_grid, np.random.default_rng(0))
    with pytest.raises(DomainError):
        smoothed_response_traces(measure_g, f)
    gridT = UniformGrid(5.0, 64)
    F = smooth_random_control(gridT, np.random.default_rng(0))
    with pytest.raises(DomainError):
        spectral_connecting_form(measure_g, F, F)
    with pytest.raises(DomainError):
        spectral_forward(measure_g,
                         smooth_random_control(UniformGrid(3.5, 64),
                                               np.random.default_rng(0)), 3.5)


def test_measure_csv(tmp_path, measure_g):
    path = tmp_path / "measure.csv"
    measure_g.write_csv(path)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "n,lambda,beta,gamma"
    assert len(rows) == measure_g.count + 1
