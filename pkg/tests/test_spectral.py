import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from chdp.spectral import (
    Diffeo,
    DegenerateJacobianError,
    Grid,
    PeriodicField,
    compose,
    constant_field,
    cosine_field,
    dealias,
    derivative,
    evaluate,
    field_from_function,
    helmholtz,
    helmholtz_inverse,
    inner_h1,
    inner_l2,
    invert_diffeo,
    random_band_limited,
    sine_field,
    zero_field,
)

TWO_PI = 2.0 * np.pi


def test_grid_invariants():
    g = Grid(64)
    assert g.n == 64
    assert np.allclose(np.diff(g.points), 1.0 / 64)
    assert g.points[0] == 0.0
    with pytest.raises(ValueError):
        Grid(63)
    with pytest.raises(ValueError):
        Grid(8)


def test_field_roundtrip(grid128, rng):
    f = random_band_limited(grid128, rng, 20)
    back = PeriodicField.from_hat(grid128, f.hat)
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * max(1.0, np.max(np.abs(f.values)))


def test_field_values_readonly(grid64):
    f = cosine_field(grid64, 1)
    with pytest.raises(ValueError):
        f.values[0] = 3.0


def test_derivative_cosine(grid64):
    f = cosine_field(grid64, 1)
    expected = -TWO_PI * np.sin(TWO_PI * grid64.points)
    assert np.allclose(derivative(f).values, expected, atol=1e-12)


def test_derivative_constant(grid64):
    assert np.max(np.abs(derivative(constant_field(grid64, 1.0)).values)) == 0.0


def test_derivative_finite_difference_oracle(grid128):
    # sin(4 pi x) against a centered difference at h = 1e-6
    h = 1e-6
    x = grid128.points
    fd = (np.sin(4 * np.pi * (x + h)) - np.sin(4 * np.pi * (x - h))) / (2 * h)
    f = sine_field(grid128, 2)
    assert np.max(np.abs(derivative(f).values - fd)) <= 1e-6


def test_derivative_zero_mean(grid64, rng):
    f = random_band_limited(grid64, rng, 10) + 0.7
    assert abs(derivative(f).mean()) <= 1e-14


def test_helmholtz_eigenfunction(grid64):
    f = cosine_field(grid64, 1)
    assert np.allclose(helmholtz(f).values, (1 + 4 * np.pi**2) * f.values, rtol=1e-13)


def test_helmholtz_constant(grid64):
    f = constant_field(grid64, 2.5)
    assert np.allclose(helmholtz(f).values, f.values, rtol=1e-14)


def test_helmholtz_mode_by_mode(grid64):
    # cos(2 pi x) + sin(6 pi x): each mode scales by its own multiplier
    f = cosine_field(grid64, 1) + sine_field(grid64, 3)
    x = grid64.points
    expected = ((1 + (TWO_PI) ** 2) * np.cos(TWO_PI * x)
                + (1 + (6 * np.pi) ** 2) * np.sin(6 * np.pi * x))
    assert np.allclose(helmholtz(f).values, expected, rtol=1e-12)


def test_helmholtz_inverse_cosine(grid64):
    f = cosine_field(grid64, 1)
    assert np.allclose(helmholtz_inverse(f).values, f.values / (1 + 4 * np.pi**2),
                       rtol=1e-13)


def test_helmholtz_inverse_constant(grid64):
    f = constant_field(grid64, 1.0)
    assert np.allclose(helmholtz_inverse(f).values, f.values, rtol=1e-14)


def test_helmholtz_roundtrip(grid128, rng):
    w = random_band_limited(grid128, rng, 40)
    back = helmholtz_inverse(helmholtz(w))
    scale = np.max(np.abs(w.values))
    assert np.max(np.abs(back.values - w.values)) <= 1e-11 * scale


def test_operators_commute(grid128, rng):
    f = random_band_limited(grid128, rng, 10)
    pairs = [
        (lambda g: derivative(helmholtz(g)), lambda g: helmholtz(derivative(g))),
        (lambda g: derivative(helmholtz_inverse(g)), lambda g: helmholtz_inverse(derivative(g))),
        (lambda g: helmholtz(helmholtz_inverse(g)), lambda g: helmholtz_inverse(helmholtz(g))),
    ]
    for left, right in pairs:
        assert np.max(np.abs(left(f).values - right(f).values)) <= 1e-10


def test_inner_l2_orthogonality(grid64):
    c1 = cosine_field(grid64, 1)
    c2 = cosine_field(grid64, 2)
    one = constant_field(grid64, 1.0)
    assert inner_l2(c1, c1) == pytest.approx(0.5, abs=1e-14)
    assert inner_l2(c1, c2) == pytest.approx(0.0, abs=1e-14)
    assert inner_l2(one, one) == pytest.approx(1.0, abs=1e-14)


def test_inner_l2_grid_mismatch(grid64, grid128):
    with pytest.raises(ValueError, match="grid mismatch"):
        inner_l2(cosine_field(grid64, 1), cosine_field(grid128, 1))


def test_inner_h1_values(grid64):
    c1 = cosine_field(grid64, 1)
    one = constant_field(grid64, 1.0)
    s1 = sine_field(grid64, 1)
    assert inner_h1(c1, c1) == pytest.approx((1 + 4 * np.pi**2) / 2, rel=1e-13)
    assert inner_h1(one, one) == pytest.approx(1.0, abs=1e-14)
    assert inner_h1(c1, s1) == pytest.approx(0.0, abs=1e-13)


def test_inner_h1_is_l2_against_helmholtz(grid128, rng):
    f = random_band_limited(grid128, rng, 40)
    g = random_band_limited(grid128, rng, 40)
    assert abs(inner_h1(f, g) - inner_l2(helmholtz(f), g)) <= 1e-10


def test_compose_identity(grid64, rng):
    f = random_band_limited(grid64, rng, 15)
    out = compose(f, Diffeo.identity(grid64))
    assert np.max(np.abs(out.values - f.values)) <= 1e-12


def test_compose_shift(grid64):
    f = cosine_field(grid64, 1)
    shifted = compose(f, Diffeo.shift(grid64, 0.25))
    expected = -np.sin(TWO_PI * grid64.points)
    assert np.max(np.abs(shifted.values - expected)) <= 1e-12


def test_compose_against_oversampled_spline(grid64, rng):
    # Band-limited f evaluated off-grid must match a cubic spline built on a
    # 64x oversampled version of the same series.
    f = random_band_limited(grid64, rng, 6)
    psi = random_band_limited(grid64, rng, 3, scale=0.02)
    phi = Diffeo(psi)

    fine = Grid(64 * grid64.n)
    hat_fine = np.zeros(fine.n // 2 + 1, dtype=complex)
    hat_fine[: grid64.n // 2 + 1] = f.hat * (fine.n / grid64.n)
    fine_vals = np.fft.irfft(hat_fine, n=fine.n)
    xs = np.concatenate([fine.points, [1.0]])
    ys = np.concatenate([fine_vals, [fine_vals[0]]])
    spline = CubicSpline(xs, ys, bc_type="periodic")

    out = compose(f, phi)
    oracle = spline(np.mod(phi.warped_points, 1.0))
    assert np.max(np.abs(out.values - oracle)) <= 1e-10


def test_diffeo_rejects_degenerate():
    grid = Grid(64)
    steep = field_from_function(grid, lambda x: 0.3 * np.sin(TWO_PI * x))
    with pytest.raises(DegenerateJacobianError):
        Diffeo(steep * 2.0)


def test_invert_identity_and_shift(grid64):
    ident = invert_diffeo(Diffeo.identity(grid64))
    assert np.max(np.abs(ident.displacement.values)) <= 1e-12
    inv = invert_diffeo(Diffeo.shift(grid64, 0.25))
    assert np.allclose(inv.displacement.values, -0.25, atol=1e-12)


def test_invert_roundtrip(grid128, rng):
    psi = random_band_limited(grid128, rng, 5, scale=0.03)
    phi = Diffeo(psi)
    inv = invert_diffeo(phi)
    # phi(inv(x)) = x
    forward = inv.warped_points + evaluate(phi.displacement, inv.warped_points)
    assert np.max(np.abs(forward - grid128.points)) <= 1e-9


def test_compose_roundtrip(grid128, rng):
    # moderate band, moderate warp
    f = random_band_limited(grid128, rng, grid128.dealias_cutoff // 2)
    psi = random_band_limited(grid128, rng, 4, scale=0.02)
    phi = Diffeo(psi)
    back = compose(compose(f, phi), invert_diffeo(phi))
    assert np.max(np.abs(back.values - f.values)) <= 1e-8


def test_compose_roundtrip_full_band(grid128, rng):
    # content up to the n/3 cutoff survives a mild warp: the phase
    # modulation depth 2 pi K |psi| must stay small or the composed field
    # spreads past Nyquist
    f = random_band_limited(grid128, rng, grid128.dealias_cutoff)
    psi = random_band_limited(grid128, rng, 2, scale=3e-3)
    phi = Diffeo(psi)
    back = compose(compose(f, phi), invert_diffeo(phi))
    assert np.max(np.abs(back.values - f.values)) <= 1e-8


def test_dealias_cutoff(grid128):
    assert 3 * grid128.dealias_cutoff < grid128.n
    high = cosine_field(grid128, grid128.dealias_cutoff + 1)
    assert np.max(np.abs(dealias(high).values)) <= 1e-13
    low = cosine_field(grid128, grid128.dealias_cutoff)
    assert np.max(np.abs(dealias(low).values - low.values)) <= 1e-13


def test_zero_field(grid64):
    assert np.all(zero_field(grid64).values == 0.0)
