import math

import numpy as np
import pytest

from renyires import Channel, Pmf, mutual_info
from renyires import wiretap as wt
from renyires.prob_core import cond_kl_array

SUM_CAP = 0.368064  # ln 2 - H2(0.1)
I_XZ = 0.082283  # ln 2 - H2(0.3)
LOG_116 = 0.148420
C_DEGRADED = 0.285781  # H2(0.3) - H2(0.1)


@pytest.fixture(scope="module")
def binary():
    return wt.WiretapChannel.binary(), Pmf.uniform(2)


@pytest.fixture(scope="module")
def stochastic_regions(binary):
    wc, u = binary
    return {s: wt.stochastic_encoder_region(wc, u, s, 100) for s in (0.0, 1.0)}


def test_channels_need_shared_input():
    from renyires import ModelValidationError

    with pytest.raises(ModelValidationError):
        wt.WiretapChannel(Channel.bsc(0.1), Channel.from_matrix(np.full((3, 2), 0.5)))


# --- leakage rates ---------------------------------------------------------


def test_r_tilde_examples(binary):
    wc, u = binary
    assert wt.r_tilde(u, wc.eaves, u, 1.0) == pytest.approx(LOG_116, abs=1e-6)
    assert wt.r_tilde(u, wc.eaves, u, 0.0) == pytest.approx(I_XZ, abs=1e-6)
    assert wt.r_tilde(Pmf.bernoulli(0.3), wc.eaves, Pmf.bernoulli(0.2), -1.0) == 0.0


def test_r_tilde_prime_identity_auxiliary(binary):
    wc, u = binary
    ident = Channel.identity(wc.input_alphabet)
    for s in (-0.5, 0.0):
        assert wt.r_tilde_prime(u, ident, wc.eaves, u, s) == pytest.approx(mutual_info(u, wc.eaves), abs=1e-12)
    assert wt.r_tilde_prime(u, ident, wc.eaves, u, -1.0) == 0.0
    value, spread = wt.r_tilde_prime_detail(u, ident, wc.eaves, u, 1.0)
    assert value == pytest.approx(LOG_116, abs=1e-6)
    assert value >= wt.r_tilde(u, wc.eaves, u, 1.0) - 1e-9
    assert spread < 1e-6


def test_r_tilde_prime_above_channel_point():
    rng = np.random.default_rng(2)
    eaves = Channel.bsc(0.3)
    qz = Pmf.uniform(2)
    for _ in range(10):
        pw = Pmf.from_probs(rng.dirichlet(np.ones(3)))
        pxw = Channel.from_matrix(rng.dirichlet(np.ones(2), size=3), output_alphabet=eaves.input_alphabet)
        pzw = pxw.rows @ eaves.rows
        floor = float(cond_kl_array(pw.probs, pzw, qz.probs))
        for s in (0.25, 1.0):
            assert wt.r_tilde_prime(pw, pxw, eaves, qz, s, restarts=10) >= floor - 1e-12


# --- deterministic region --------------------------------------------------


@pytest.mark.parametrize("s, floor", [(0.0, I_XZ), (1.0, LOG_116)])
def test_det_region_single_piece(binary, s, floor):
    wc, u = binary
    reg = wt.det_encoder_region(wc, u, s, 100)
    assert len(reg.pieces) == 1
    assert reg.pieces[0].sum_cap == pytest.approx(SUM_CAP, abs=1e-6)
    assert reg.pieces[0].r0_min == pytest.approx(floor, abs=1e-6)
    assert reg.vertices()[0] == pytest.approx((floor, SUM_CAP - floor), abs=1e-6)


def test_det_region_infeasible_target(binary):
    wc, _ = binary
    reg = wt.det_encoder_region(wc, Pmf.bernoulli(0.95), 1.0, 50)
    assert not reg.feasible and reg.is_empty
    assert not reg.contains(0.1, 0.1)


def test_det_region_keeps_empty_pieces():
    wc = wt.WiretapChannel(Channel.bsc(0.3), Channel.bsc(0.1))
    reg = wt.det_encoder_region(wc, Pmf.uniform(2), 1.0, 20)
    assert reg.pieces and all(p.empty for p in reg.pieces)
    assert reg.metadata["empty_pieces"] == len(reg.pieces)
    assert reg.is_empty


def test_det_region_left_boundary(binary):
    wc, u = binary
    reg = wt.det_encoder_region(wc, u, 1.0, 100)
    assert reg.contains(LOG_116 + 0.01, 0.05)
    assert not reg.contains(LOG_116 - 0.01, 0.05)
    assert not reg.contains(0.0, 0.0)


# --- stochastic region -----------------------------------------------------


def test_stochastic_max_r1_s0(stochastic_regions):
    assert stochastic_regions[0.0].max_r1() == pytest.approx(C_DEGRADED, abs=2e-3)


def test_stochastic_membership_examples(stochastic_regions):
    reg = stochastic_regions[0.0]
    assert reg.contains(0.09, 0.27)
    assert not reg.contains(0.09, 0.29)


def test_stochastic_contains_deterministic(binary, stochastic_regions):
    wc, u = binary
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 0.4, size=(1000, 2))
    for s, reg in stochastic_regions.items():
        det = wt.det_encoder_region(wc, u, s, 100)
        d = det.contains(pts[:, 0], pts[:, 1])
        assert np.all(reg.contains(pts[:, 0], pts[:, 1])[d])


def test_floor_form_inside_cap_form(stochastic_regions):
    rng = np.random.default_rng(1)
    pts = rng.uniform(0, 0.4, size=(1000, 2))
    for reg in stochastic_regions.values():
        a = reg.with_form("r0_floor").contains(pts[:, 0], pts[:, 1])
        b = reg.with_form("r1_cap").contains(pts[:, 0], pts[:, 1])
        assert np.all(b[a])


def test_cap_form_downward_closed(stochastic_regions):
    rng = np.random.default_rng(2)
    reg = stochastic_regions[1.0].with_form("r1_cap")
    pts = rng.uniform(0, 0.4, size=(1000, 2))
    inside = pts[reg.contains(pts[:, 0], pts[:, 1])]
    shrink = inside * rng.uniform(0, 1, size=inside.shape)
    assert np.all(reg.contains(shrink[:, 0], shrink[:, 1]))


def test_pruning_keeps_union(binary):
    wc, u = binary
    full = wt.stochastic_encoder_region(wc, u, 0.5, 20, w_grid_res=6, prune=False)
    pruned = wt.stochastic_encoder_region(wc, u, 0.5, 20, w_grid_res=6, prune=True)
    assert len(pruned.pieces) < len(full.pieces)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0, 0.4, size=(2000, 2))
    for form in wt.FORMS:
        a = full.with_form(form).contains(pts[:, 0], pts[:, 1])
        b = pruned.with_form(form).contains(pts[:, 0], pts[:, 1])
        assert np.array_equal(a, b)


def test_region_metadata(stochastic_regions):
    assert stochastic_regions[0.0].inner_approx
    reg = stochastic_regions[1.0]
    assert not reg.inner_approx
    assert reg.metadata["restarts"] == wt.SWEEP_RESTARTS
    assert reg.metadata["w_card"] == 3


def test_region_json_round_trip(stochastic_regions):
    reg = stochastic_regions[1.0]
    back = wt.RateRegion.from_json(reg.to_json())
    rng = np.random.default_rng(4)
    pts = rng.uniform(0, 0.4, size=(500, 2))
    assert np.array_equal(back.contains(pts[:, 0], pts[:, 1]), reg.contains(pts[:, 0], pts[:, 1]))
    assert back.to_json() == reg.to_json()


def test_boundary_and_vertices(binary):
    wc, u = binary
    reg = wt.det_encoder_region(wc, u, 1.0, 100)
    b = dict(reg.boundary([0.0, 0.2, 0.3, 0.5]))
    assert 0.0 not in b
    assert b[0.2] == pytest.approx(SUM_CAP - 0.2, abs=1e-6)
    assert 0.5 not in b


# --- capacities ------------------------------------------------------------


def test_effective_capacity_ordering(binary):
    wc, u = binary
    c0 = wt.effective_secrecy_capacity(wc, u, 0.0, 100)
    c1 = wt.effective_secrecy_capacity(wc, u, 1.0, 100)
    assert c0 == pytest.approx(C_DEGRADED, abs=2e-3)
    assert c1 <= c0 + 1e-9


def test_effective_capacity_order_zero(binary):
    wc, u = binary
    assert wt.effective_secrecy_capacity(wc, u, -1.0, 50) == pytest.approx(SUM_CAP, abs=1e-6)


def test_mi_capacity(binary):
    wc, u = binary
    cmi = wt.mi_secrecy_capacity(wc, 100)
    assert cmi == pytest.approx(C_DEGRADED, abs=2e-3)
    for s in (0.25, 0.5, 1.0):
        assert cmi >= wt.effective_secrecy_capacity(wc, u, s, 100) - 2e-3
    same = wt.WiretapChannel(Channel.bsc(0.2), Channel.bsc(0.2))
    assert wt.mi_secrecy_capacity(same, 20) == pytest.approx(0.0, abs=1e-12)


def test_mi_capacity_single_parameter_oracle():
    # degraded BSC pair: sweep the crossover of a BSC auxiliary with uniform input
    def h2(p):
        return 0.0 if p in (0.0, 1.0) else -p * math.log(p) - (1 - p) * math.log(1 - p)

    def star(a, b):
        return a * (1 - b) + b * (1 - a)

    best = max(
        (math.log(2) - h2(star(a, 0.1))) - (math.log(2) - h2(star(a, 0.3))) for a in np.linspace(0, 0.5, 5001)
    )
    assert best == pytest.approx(C_DEGRADED, abs=1e-6)
