import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from jamsec import analysis
from jamsec.analysis import Region, RegimeTag
from jamsec.config import RatePair, SystemConfig, dbm_to_watts, derive_constants

LN2 = math.log(2)


def _cfg(nj=8, ps_dbm=30.0, **kw):
    return SystemConfig(jammer_antennas=nj, source_power=dbm_to_watts(ps_dbm), **kw)


def test_connection_outage_multi_antenna_boundary():
    # at the rate where the accumulation boundary sits for a 0 dBm jammer, p_co/(1-p_co) = P_J T / rho_J
    cfg = _cfg()
    energy = 1e-3 * cfg.block_time / derive_constants(cfg).rho_j
    p = energy / (1 + energy)
    theta = -derive_constants(cfg).rho_d * math.log1p(-p)
    rt = math.log2(1 + theta)
    assert rt == pytest.approx(26.92299, abs=1e-5)
    assert analysis.connection_outage(RatePair(rt, 0), cfg, 1e-3) == pytest.approx(0.79618, abs=1e-5)
    # slightly below the boundary the outage is lower
    assert analysis.connection_outage(RatePair(26.92, 0), cfg, 1e-3) == pytest.approx(0.79550, abs=1e-5)


def test_gamma_d_cdf_single_antenna_matches_monte_carlo():
    cfg = _cfg(nj=1)
    pj = dbm_to_watts(-13)
    c = derive_constants(cfg, pj)
    rng = np.random.default_rng(0)
    x, y = rng.exponential(size=(2, 400_000))
    m = cfg.path_loss_exponent
    gamma_d = c.rho_d * x / (1 + pj / (cfg.d_JD**m * cfg.noise_power) * y)
    thr = 2.0**10 - 1
    mc = np.mean(gamma_d < thr)
    assert analysis.gamma_d_cdf(thr, cfg, pj) == pytest.approx(mc, abs=4 * math.sqrt(mc * (1 - mc) / x.size))


def test_gamma_d_cdf_rejects_negative():
    with pytest.raises(ValueError):
        analysis.gamma_d_cdf(-1.0, _cfg(), 0.0)


@pytest.mark.parametrize("nj,phi,tau", [(1, 0.3, 2.0), (2, 2.0, 3.0), (4, 2.0, 3.0), (8, 0.05, 40.0), (32, 1.0, 1.0)])
def test_secrecy_outage_against_quadrature(nj, phi, tau):
    if nj == 1:
        g = stats.expon()
    else:
        g = stats.gamma(a=nj - 1, scale=1 / (nj - 1))
    oracle, _ = integrate.quad(lambda t: math.exp(-tau * phi * t) * g.pdf(t), 0, math.inf, epsabs=1e-13)
    cfg = _cfg(nj=nj)
    # choose the jamming power that yields the requested phi, and rates that yield tau
    m = cfg.path_loss_exponent
    pj = phi * cfg.source_power * cfg.d_JE**m / cfg.d_SE**m
    rates = RatePair(5.0 + math.log2(1 + tau), 5.0)
    assert analysis.secrecy_outage(rates, cfg, pj) == pytest.approx(oracle, abs=1e-9)


def test_secrecy_outage_degenerate_cases():
    cfg = _cfg()
    assert analysis.secrecy_outage(RatePair(3, 3), cfg, 1.0) == 1.0
    assert analysis.secrecy_outage(RatePair(4, 3), cfg, 0.0) == 1.0


@settings(max_examples=60)
@given(nj=st.sampled_from([1, 2, 3, 8, 16]), eps=st.floats(1e-3, 0.5), gap=st.floats(0.05, 20), rs=st.floats(0, 10))
def test_optimal_jamming_power_meets_constraint_with_equality(nj, eps, gap, rs):
    cfg = _cfg(nj=nj, secrecy_constraint=eps)
    rates = RatePair(rs + gap, rs)
    pj = analysis.optimal_jamming_power(rates, cfg)
    assert analysis.secrecy_outage(rates, cfg, pj) == pytest.approx(eps, rel=1e-9)
    assert analysis.secrecy_outage(rates, cfg, 0.9 * pj) > eps


def test_optimal_jamming_power_single_antenna_example():
    # 30 dBm source, 8-bit redundancy
    cfg = _cfg(nj=1)
    expected = (15 / 40) ** 3 * 99 / 255
    assert analysis.optimal_jamming_power(RatePair(10, 2), cfg) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError, match="gap"):
        analysis.optimal_jamming_power(RatePair(2, 2), cfg)


def test_time_split_example():
    cfg = _cfg(nj=1)
    rates = RatePair(10, 2)
    p = analysis.transmission_probability(rates, cfg, dbm_to_watts(-13))
    assert p == pytest.approx(0.38968, abs=1e-5)
    assert analysis.classify_regime(rates, cfg, dbm_to_watts(-13)).tag is RegimeTag.ENERGY_BALANCED


@settings(max_examples=80)
@given(
    nj=st.sampled_from([1, 2, 8]),
    ps=st.floats(-10, 40),
    rt=st.floats(0.1, 35),
    frac=st.floats(0.01, 0.99),
)
def test_report_consistency(nj, ps, rt, frac):
    cfg = _cfg(nj=nj, ps_dbm=ps)
    rates = RatePair(rt, rt * frac)
    rep = analysis.throughput(rates, cfg)
    assert 0.0 <= rep.p_tx <= 1.0
    assert 0.0 <= rep.pi <= rates.rs
    assert rep.pi == pytest.approx(rep.p_tx * rates.rs)
    # terms agree with the general-power expressions evaluated at the optimal power
    assert rep.term_a == pytest.approx(rep.jamming_power * cfg.block_time / derive_constants(cfg).rho_j, rel=1e-9)
    odds = analysis.outage_odds(rates, cfg, rep.jamming_power)
    if math.isfinite(odds) and odds < 1e12:
        assert rep.term_b == pytest.approx(odds, rel=1e-9)
        assert rep.p_tx == pytest.approx(analysis.transmission_probability(rates, cfg, rep.jamming_power), rel=1e-9)
    assert rep.p_so == pytest.approx(cfg.secrecy_constraint, rel=1e-9)


@settings(max_examples=60)
@given(nj=st.sampled_from([2, 4, 8]), ps=st.floats(-10, 40), rs=st.floats(0.1, 15), d1=st.floats(0.1, 10), d2=st.floats(0.1, 10))
def test_throughput_monotone_in_secrecy_gap_at_fixed_rs(nj, ps, rs, d1, d2):
    # multi-antenna: raising rt at fixed rs lowers (a) but raises (b)
    cfg = _cfg(nj=nj, ps_dbm=ps)
    lo, hi = sorted((d1, d2))
    assume(hi - lo > 1e-6)
    a_lo, b_lo = analysis.throughput_terms(rs + lo, rs, cfg)
    a_hi, b_hi = analysis.throughput_terms(rs + hi, rs, cfg)
    assert a_hi < a_lo
    assert b_hi > b_lo


def test_surface_vectorization_matches_scalar():
    cfg = _cfg(nj=1, ps_dbm=10)
    rt = np.array([[5.0], [12.0], [20.0]])
    rs = np.array([[0.5, 2.0, 4.0, 25.0]])
    surf = analysis.throughput_surface(rt, rs, cfg)
    for i in range(3):
        for j in range(4):
            r = RatePair(float(rt[i, 0]), min(float(rs[0, j]), float(rt[i, 0])))
            expect = 0.0 if rs[0, j] >= rt[i, 0] else analysis.throughput(r, cfg).pi
            assert surf[i, j] == pytest.approx(expect, rel=1e-12, abs=1e-300)


def test_region_classification():
    assert analysis.region_of(1.0, 2.0) is Region.D1
    assert analysis.region_of(2.0, 1.0) is Region.D2
    assert analysis.region_of(1.0, 1.0 + 1e-12) is Region.D_HAT


def test_zero_jamming_power_gives_accumulation():
    cfg = _cfg()
    reg = analysis.classify_regime(RatePair(20, 1), cfg, 0.0)
    assert reg.tag is RegimeTag.ENERGY_ACCUMULATION
