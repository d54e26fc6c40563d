import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcqwalk import catalog
from mcqwalk.entanglement import reduce
from mcqwalk.walk import (
    CoinState,
    StepConfig,
    UndefinedSiteError,
    WalkState,
    WraparoundError,
    apply_step,
    coin_state_at,
    direct_moment,
    evolve,
    new_walk_state,
    position_distribution,
    walk_for,
    write_distribution_csv,
    write_state_csv,
)

from conftest import coin_states, dense_step_operator, random_coin

R2 = 1 / np.sqrt(2)


def test_coin_state_validation():
    with pytest.raises(ValueError):
        CoinState([1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        CoinState([1.0, 1.0])
    assert CoinState([1.0, 0.0]).num_coins == 1
    assert CoinState.from_basis("101").amplitudes[5] == 1


def test_step_config_rejects_non_unitary_toss():
    with pytest.raises(ValueError):
        StepConfig(1, np.array([[1, 1], [0, 1]]))


def test_new_walk_state_product():
    s = new_walk_state(CoinState([1, 0]), 5, 2)
    expected = np.zeros((2, 5))
    expected[0, 2] = 1
    np.testing.assert_array_equal(s.amplitudes, expected)
    assert s.steps_taken == 0

    s = new_walk_state(CoinState([R2, R2]), 3, 0)
    np.testing.assert_allclose(s.amplitudes[:, 0], [R2, R2])

    s = new_walk_state(catalog.gamma_ghz(0.3).coin, 121, 60)
    assert abs(s.norm - 1) < 1e-12


def test_new_walk_state_errors():
    with pytest.raises(ValueError):
        new_walk_state(CoinState([1, 0]), 5, 5)
    with pytest.raises(ValueError):
        new_walk_state(CoinState([1, 0]), 0, 0)
    with pytest.raises(ValueError):
        new_walk_state([0.6, 0.6], 5, 2)


def test_one_step_amplitudes():
    s = apply_step(new_walk_state(CoinState([1, 0]), 11, 5), StepConfig(1))
    assert s.amplitudes[0, 6] == pytest.approx(R2)
    assert s.amplitudes[1, 4] == pytest.approx(1j * R2)
    assert np.count_nonzero(np.abs(s.amplitudes) > 1e-15) == 2
    assert s.steps_taken == 1


def test_active_qubit_out_of_range():
    s = new_walk_state(CoinState.from_basis("00"), 11, 5)
    with pytest.raises(ValueError):
        apply_step(s, StepConfig(3))


def test_two_step_distribution():
    s = evolve(new_walk_state(CoinState([1, 0]), 11, 5), StepConfig(1), 2)
    p = position_distribution(s)
    np.testing.assert_allclose(p[[7, 5, 3]], [0.25, 0.5, 0.25], atol=1e-15)
    assert p.sum() == pytest.approx(1, abs=1e-12)


def test_three_step_distribution_matches_dense_oracle():
    n, x0 = 11, 5
    psi0 = np.zeros(2 * n, complex)
    psi0[x0] = 1.0  # coin 0 at x0
    E = dense_step_operator(1, n, 1)
    oracle = np.linalg.matrix_power(E, 3) @ psi0
    p_oracle = (np.abs(oracle.reshape(2, n)) ** 2).sum(0)
    np.testing.assert_allclose(p_oracle[[8, 6, 4, 2]], [1 / 8, 5 / 8, 1 / 8, 1 / 8], atol=1e-15)

    s = evolve(new_walk_state(CoinState([1, 0]), n, x0), StepConfig(1), 3)
    np.testing.assert_allclose(s.amplitudes.reshape(-1), oracle, atol=1e-15)
    assert direct_moment(s, 1) == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("m,active", [(2, 1), (2, 2), (3, 2), (4, 3)])
def test_multi_coin_step_matches_dense_oracle(rng, m, active):
    n, x0, t = 15, 7, 5
    coin = random_coin(rng, m)
    s = new_walk_state(coin, n, x0)
    E = dense_step_operator(m, n, active)
    vec = s.amplitudes.reshape(-1)
    s = evolve(s, StepConfig(active), t)
    np.testing.assert_allclose(s.amplitudes.reshape(-1), np.linalg.matrix_power(E, t) @ vec, atol=1e-13)


def test_evolve_identity_and_semigroup(rng):
    coin = random_coin(rng, 3)
    cfg = StepConfig(2)
    s = walk_for(coin, 12)
    assert evolve(s, cfg, 0) is s
    a = evolve(evolve(s, cfg, 5), cfg, 7)
    b = evolve(s, cfg, 12)
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-14)
    assert a.steps_taken == b.steps_taken == 12


def test_evolve_rejects_wraparound_for_moment_walks():
    s = walk_for(CoinState([1, 0]), 10)
    with pytest.raises(WraparoundError):
        evolve(s, StepConfig(1), 11 + s.lattice_size)
    with pytest.raises(WraparoundError):
        walk_for(CoinState([1, 0]), 10, lattice_size=21)


def test_direct_moment_detects_wrap():
    s = evolve(new_walk_state(CoinState([1, 0]), 5, 2), StepConfig(1), 3)
    with pytest.raises(WraparoundError):
        direct_moment(s, 1)


def test_direct_moment_fresh_state():
    s = walk_for(CoinState([R2, R2]), 4)
    assert direct_moment(s, 1) == 0
    assert direct_moment(s, 2) == 0
    with pytest.raises(ValueError):
        direct_moment(s, 3)


def test_ghz_balanced_distribution_symmetric():
    s = evolve(walk_for(catalog.gamma_ghz(R2).coin, 50), StepConfig(1), 50)
    p = position_distribution(s)
    x0 = s.start_site
    np.testing.assert_allclose(p[x0 + 1 : x0 + 52], p[x0 - 1 : x0 - 52 : -1], atol=1e-10)


def test_coin_state_at(rng):
    coin = random_coin(rng, 2)
    s = new_walk_state(coin, 9, 4)
    c, w = coin_state_at(s, 4)
    assert w == pytest.approx(1)
    np.testing.assert_allclose(c.amplitudes, coin.amplitudes)
    with pytest.raises(UndefinedSiteError):
        coin_state_at(s, 3)


def test_start_site_single_qubit_purities_constant():
    coin = catalog.gamma_ghz(0.3).coin
    s = evolve(walk_for(coin, 50), StepConfig(1), 50)
    local, _ = coin_state_at(s, s.start_site)
    for q in (1, 2, 3):
        p0 = np.real(np.trace(reduce(coin, [q]).entries @ reduce(coin, [q]).entries))
        p1 = np.real(np.trace(reduce(local, [q]).entries @ reduce(local, [q]).entries))
        assert abs(p0 - p1) < 1e-10


@settings(max_examples=40, deadline=None)
@given(coin=coin_states(), t=st.integers(0, 50), data=st.data())
def test_unitarity_and_locality(coin, t, data):
    active = data.draw(st.integers(1, coin.num_coins))
    s = walk_for(coin, t)
    cfg = StepConfig(active)
    for _ in range(t):
        s = apply_step(s, cfg)
        assert abs(s.norm - 1) < 1e-12
    p = position_distribution(s)
    d = s.displacements()
    assert np.all(p[np.abs(d) > t] == 0)


@settings(max_examples=25, deadline=None)
@given(coin=coin_states(min_coins=2), t=st.integers(1, 30), data=st.data())
def test_spectator_qubits_untouched(coin, t, data):
    m = coin.num_coins
    active = data.draw(st.integers(1, m))
    spectators = [q for q in range(1, m + 1) if q != active]
    s = evolve(walk_for(coin, t), StepConfig(active), t)
    # trace over active qubit and position
    psi = np.moveaxis(s.amplitudes.reshape((2,) * m + (-1,)), active - 1, -2)
    psi = psi.reshape(1 << (m - 1), -1)
    rho_t = psi @ psi.conj().T
    rho_0 = reduce(coin, spectators).entries
    np.testing.assert_allclose(rho_t, rho_0, atol=1e-12)


def test_csv_exports(tmp_path):
    s = evolve(walk_for(CoinState([1, 0]), 1), StepConfig(1), 1)
    write_distribution_csv(tmp_path / "d.csv", s)
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "site,probability"
    assert len(lines) == s.lattice_size + 1
    total = sum(float(l.split(",")[1]) for l in lines[1:])
    assert total == pytest.approx(1, abs=1e-15)

    write_state_csv(tmp_path / "s.csv", s)
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "coin_index,site,re,im"
    assert len(rows) == 2 * s.lattice_size + 1
    recon = np.zeros_like(s.amplitudes)
    for r in rows[1:]:
        c, x, re, im = r.split(",")
        recon[int(c), int(x)] = complex(float(re), float(im))
    np.testing.assert_array_equal(recon, s.amplitudes)


def test_walk_state_is_immutable():
    s = walk_for(CoinState([1, 0]), 2)
    with pytest.raises(ValueError):
        s.amplitudes[0, 0] = 3
    assert isinstance(s, WalkState)
