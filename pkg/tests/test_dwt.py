"""Wavelet filter bank, decomposition, and reconstruction."""

import numpy as np
import pytest

from speakerkit import (
    BadParams,
    EmptySignal,
    LengthMismatch,
    LevelTooDeep,
    WaveletFilterPair,
    dump_coefficients,
    dwt_step,
    idwt_step,
    make_db8_filters,
    max_level,
    wavedec,
    waverec,
)


@pytest.fixture(scope="module")
def filters():
    return make_db8_filters()


# --- filter invariants, recomputed here rather than trusting validate() ---


def test_lowpass_sums_to_sqrt2(filters):
    assert abs(filters.lowpass.sum() - np.sqrt(2.0)) < 1e-10


def test_lowpass_unit_energy(filters):
    assert abs(np.dot(filters.lowpass, filters.lowpass) - 1.0) < 1e-10


def test_even_shift_orthogonality(filters):
    h = filters.lowpass
    for shift in (2, 4, 6):
        assert abs(np.dot(h[shift:], h[:-shift])) < 1e-10


def test_quadrature_mirror_relation(filters):
    h = filters.lowpass
    g = filters.highpass
    n = np.arange(16)
    expected = (-1.0) ** n * h[::-1]
    assert np.max(np.abs(g - expected)) < 1e-12


def test_highpass_sums_to_zero(filters):
    assert abs(filters.highpass.sum()) < 1e-10


def test_tampered_filters_rejected(filters):
    bad = np.array(filters.lowpass)
    bad[3] += 1e-6
    with pytest.raises(BadParams):
        WaveletFilterPair("db8", bad, np.array(filters.highpass))


# --- single analysis/synthesis step ---


def test_step_output_length(filters, rng):
    for n in (16, 17, 64, 100, 101, 255):
        approx, detail = dwt_step(rng.standard_normal(n), filters)
        want = (n + 15) // 2
        assert approx.shape == (want,)
        assert detail.shape == (want,)


def test_single_step_round_trip(filters, rng):
    x = rng.standard_normal(100)
    approx, detail = dwt_step(x, filters)
    back = idwt_step(approx, detail, filters, len(x))
    assert np.max(np.abs(back - x)) < 1e-8


def test_step_is_linear(filters, rng):
    x = rng.standard_normal(80)
    y = rng.standard_normal(80)
    ax, dx = dwt_step(x, filters)
    ay, dy = dwt_step(y, filters)
    az, dz = dwt_step(2.5 * x - 0.5 * y, filters)
    assert np.max(np.abs(az - (2.5 * ax - 0.5 * ay))) < 1e-10
    assert np.max(np.abs(dz - (2.5 * dx - 0.5 * dy))) < 1e-10


def test_constant_signal_maps_to_scaled_constant(filters):
    c = 0.3
    approx, detail = dwt_step(np.full(256, c), filters)
    # away from the padded borders the approx channel is exactly c*sqrt(2)
    # and the detail channel vanishes
    interior = slice(10, -10)
    assert np.max(np.abs(approx[interior] - c * np.sqrt(2.0))) < 1e-10
    assert np.max(np.abs(detail[interior])) < 1e-10


# --- multi-level decomposition ---


def test_worked_example_lengths(filters, rng):
    dec = wavedec(rng.standard_normal(1000), filters, level=3)
    assert dec.approx.shape == (138,)
    assert [d.shape[0] for d in dec.details] == [138, 261, 507]
    assert dec.source_lengths == [1000, 507, 261]
    assert dec.channel_names() == ["CA3", "CD3", "CD2", "CD1"]


def test_channel_lookup_matches_arrays(filters, rng):
    dec = wavedec(rng.standard_normal(500), filters, level=2)
    assert np.array_equal(dec.channel("CA2"), dec.approx)
    assert np.array_equal(dec.channel("CD2"), dec.details[0])
    assert np.array_equal(dec.channel("CD1"), dec.details[1])
    with pytest.raises(BadParams):
        dec.channel("CD3")


def test_round_trip_various_lengths(filters, rng):
    for n in (64, 99, 128, 500, 1000, 1311):
        x = rng.standard_normal(n)
        level = min(3, max_level(n, 16))
        back = waverec(wavedec(x, filters, level), filters)
        assert back.shape == x.shape
        assert np.max(np.abs(back - x)) < 1e-8


def test_round_trip_odd_lengths(filters, rng):
    # smallest length must still admit level 3: n / 15 >= 8
    for n in (333, 667, 1001):
        x = rng.standard_normal(n)
        back = waverec(wavedec(x, filters, 3), filters)
        assert np.max(np.abs(back - x)) < 1e-8


def test_periodized_mode_preserves_energy(filters, rng):
    x = rng.standard_normal(4096)
    dec = wavedec(x, filters, level=3, mode="periodization")
    total = np.dot(dec.approx, dec.approx)
    total += sum(np.dot(d, d) for d in dec.details)
    assert abs(total - np.dot(x, x)) < 1e-6 * np.dot(x, x)


def test_periodized_mode_round_trip(filters, rng):
    x = rng.standard_normal(512)
    dec = wavedec(x, filters, level=3, mode="periodization")
    assert dec.approx.shape == (64,)
    back = waverec(dec, filters)
    assert np.max(np.abs(back - x)) < 1e-8


def test_periodized_mode_needs_even_length(filters, rng):
    with pytest.raises(BadParams):
        wavedec(rng.standard_normal(501), filters, 1, mode="periodization")


def test_unknown_mode_rejected(filters):
    with pytest.raises(BadParams):
        wavedec(np.zeros(100), filters, 1, mode="reflect")


def test_decomposition_is_linear(filters, rng):
    x = rng.standard_normal(400)
    y = rng.standard_normal(400)
    dx = wavedec(x, filters, 3)
    dy = wavedec(y, filters, 3)
    dz = wavedec(1.5 * x + 2.0 * y, filters, 3)
    for name in dz.channel_names():
        combo = 1.5 * dx.channel(name) + 2.0 * dy.channel(name)
        assert np.max(np.abs(dz.channel(name) - combo)) < 1e-10


# --- guard rails ---


def test_empty_signal(filters):
    with pytest.raises(EmptySignal):
        wavedec(np.array([]), filters, 1)


def test_level_too_deep(filters):
    # max usable depth for 64 samples with a 16-tap filter is 2
    assert max_level(64, 16) == 2
    with pytest.raises(LevelTooDeep):
        wavedec(np.zeros(64), filters, 3)


def test_zero_level_rejected(filters):
    with pytest.raises(BadParams):
        wavedec(np.zeros(100), filters, 0)


def test_waverec_rejects_tampered_lengths(filters, rng):
    dec = wavedec(rng.standard_normal(300), filters, 2)
    dec.source_lengths[0] = 301
    with pytest.raises(LengthMismatch):
        waverec(dec, filters)


def test_dump_coefficients_round_trips(filters, rng, tmp_path):
    dec = wavedec(rng.standard_normal(300), filters, 2)
    dump_coefficients(dec, tmp_path)
    for name in dec.channel_names():
        path = tmp_path / f"{name}.txt"
        assert path.exists()
        loaded = np.loadtxt(path)
        assert np.array_equal(loaded, dec.channel(name))
