"""Game gain matrices, stability equivalences, and quadratic-game dynamics."""

import numpy as np
import pytest

from semicontract import (
    DivergenceError,
    GameSpec,
    QuadraticGame,
    diagonal_lyapunov_weights,
    equivalence_check,
    gain_aggregative,
    gain_best_response,
    gain_best_response_discrete,
    gain_pseudogradient,
    interconnection_rate,
    is_hurwitz,
    is_metzler,
    read_game_file,
    simulate_best_response,
    simulate_pseudogradient,
)


def random_spec(rng, stable_bias=None):
    """Random game spec; stable_bias biases couplings small (True) or large."""
    n = int(rng.integers(2, 7))
    mu = rng.uniform(0.5, 3.0, size=n)
    scale = 0.3 if stable_bias else (2.5 if stable_bias is False else 1.0)
    ell = scale * rng.uniform(0.0, 1.0, size=(n, n)) * mu[:, None]
    np.fill_diagonal(ell, 0.0)
    return GameSpec(mu=mu, ell=ell)


class TestGameSpec:
    def test_rejects_bad_mu(self):
        with pytest.raises(ValueError, match="positive"):
            GameSpec(mu=np.array([1.0, -1.0]), ell=np.zeros((2, 2)))
        with pytest.raises(ValueError, match="1-d"):
            GameSpec(mu=np.ones((2, 2)), ell=np.zeros((2, 2)))

    def test_rejects_bad_ell(self):
        with pytest.raises(ValueError, match="shape"):
            GameSpec(mu=np.ones(2), ell=np.zeros((3, 3)))
        with pytest.raises(ValueError, match="nonnegative"):
            GameSpec(mu=np.ones(2), ell=np.array([[0.0, -1.0], [0.0, 0.0]]))
        with pytest.raises(ValueError, match="diagonal"):
            GameSpec(mu=np.ones(2), ell=np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_players(self):
        spec = GameSpec(mu=np.ones(3), ell=np.zeros((3, 3)))
        assert spec.players == 3


class TestGainMatrices:
    def test_worked_example(self):
        spec = GameSpec(
            mu=np.array([1.0, 1.0]),
            ell=np.array([[0.0, 0.5], [0.5, 0.0]]),
        )
        assert np.array_equal(
            gain_pseudogradient(spec), [[-1.0, 0.5], [0.5, -1.0]]
        )
        assert np.array_equal(
            gain_best_response_discrete(spec), [[0.0, 0.5], [0.5, 0.0]]
        )
        assert np.array_equal(
            gain_best_response(spec), [[-1.0, 0.5], [0.5, -1.0]]
        )

    def test_heterogeneous_mu_scales_rows(self):
        spec = GameSpec(
            mu=np.array([2.0, 4.0]),
            ell=np.array([[0.0, 1.0], [2.0, 0.0]]),
        )
        assert np.array_equal(
            gain_best_response_discrete(spec), [[0.0, 0.5], [0.5, 0.0]]
        )

    def test_pseudogradient_factors_through_best_response(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            spec = random_spec(rng)
            lhs = gain_pseudogradient(spec)
            rhs = np.diag(spec.mu) @ gain_best_response(spec)
            assert np.allclose(lhs, rhs, atol=1e-12)
            assert is_metzler(lhs)
            assert is_metzler(gain_best_response(spec))

    def test_equivalence_sweep(self):
        rng = np.random.default_rng(43)
        verdicts = {True: 0, False: 0}
        for k in range(100):
            bias = True if k % 3 == 0 else (False if k % 3 == 1 else None)
            spec = random_spec(rng, stable_bias=bias)
            report = equivalence_check(spec)
            assert report.consistent
            verdicts[report.pseudogradient_hurwitz] += 1
        # the sweep must exercise both verdicts to mean anything
        assert verdicts[True] > 0 and verdicts[False] > 0

    def test_equivalence_on_marginal_spec(self):
        # row sums exactly zero: spectral abscissa 0, nothing is stable
        spec = GameSpec(
            mu=np.array([1.0, 1.0]),
            ell=np.array([[0.0, 1.0], [1.0, 0.0]]),
        )
        report = equivalence_check(spec)
        assert not report.pseudogradient_hurwitz
        assert not report.best_response_hurwitz
        assert not report.discrete_schur
        assert report.consistent


class TestAggregative:
    def test_worked_example(self):
        agg = gain_aggregative(np.array([2.0, 2.0]), np.array([1.0, 1.0]))
        assert np.allclose(agg.matrix, [[-1.5, 0.5], [0.5, -1.5]])
        assert np.allclose(agg.row_sums, [-1.0, -1.0])
        assert agg.row_sums_negative
        assert agg.hurwitz

    def test_row_sum_condition_is_only_sufficient(self):
        # one positive row sum, but the matrix is still Hurwitz
        agg = gain_aggregative(np.array([1.0, 4.0]), np.array([1.5, 0.5]))
        assert np.allclose(agg.matrix, [[-0.25, 0.75], [0.25, -3.75]])
        assert not agg.row_sums_negative
        assert agg.hurwitz

    def test_unstable_example(self):
        agg = gain_aggregative(np.array([0.5, 0.5]), np.array([2.0, 2.0]))
        assert not agg.hurwitz
        assert not agg.row_sums_negative

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError, match="same length"):
            gain_aggregative(np.ones(2), np.ones(3))
        with pytest.raises(ValueError, match="positive"):
            gain_aggregative(np.array([0.0, 1.0]), np.ones(2))
        with pytest.raises(ValueError, match="nonnegative"):
            gain_aggregative(np.ones(2), np.array([-1.0, 0.0]))


class TestInterconnectionRate:
    def test_explicit_margin(self):
        assert interconnection_rate(np.array([[-0.5]]), epsilon=0.1) == pytest.approx(0.4)

    def test_default_margin(self):
        rate = interconnection_rate(np.array([[-0.5]]))
        assert rate == pytest.approx(0.4995)

    def test_rejects_non_hurwitz(self):
        with pytest.raises(ValueError, match="Hurwitz"):
            interconnection_rate(np.array([[0.1]]))

    def test_rejects_margin_out_of_range(self):
        with pytest.raises(ValueError, match="epsilon"):
            interconnection_rate(np.array([[-0.5]]), epsilon=0.6)
        with pytest.raises(ValueError, match="epsilon"):
            interconnection_rate(np.array([[-0.5]]), epsilon=0.0)


class TestDiagonalLyapunovTransfer:
    def test_weights_rescale_between_gains(self):
        # a diagonal certificate for the pseudogradient gain, scaled by mu,
        # certifies the best-response gain
        rng = np.random.default_rng(47)
        certified = 0
        for _ in range(20):
            spec = random_spec(rng, stable_bias=True)
            gp = gain_pseudogradient(spec)
            if not is_hurwitz(gp):
                continue
            p = diagonal_lyapunov_weights(gp)
            pb = p * spec.mu
            gb = gain_best_response(spec)
            C = gb.T @ np.diag(pb) + np.diag(pb) @ gb
            assert np.linalg.eigvalsh(C).max() < 0
            certified += 1
        assert certified >= 10


class TestQuadraticGame:
    def test_nash_equilibrium_solve(self):
        game = QuadraticGame(
            mu=np.array([2.0, 2.0]),
            K=np.array([[0.0, 1.0], [1.0, 0.0]]),
            b=np.array([-2.0, -2.0]),
        )
        assert np.allclose(game.nash_equilibrium(), [2.0 / 3.0, 2.0 / 3.0])

    def test_spec_uses_coupling_magnitudes(self):
        game = QuadraticGame(
            mu=np.array([1.0, 1.0]),
            K=np.array([[0.0, -0.5], [0.25, 0.0]]),
            b=np.zeros(2),
        )
        assert np.array_equal(game.spec().ell, [[0.0, 0.5], [0.25, 0.0]])

    def test_rejects_bad_data(self):
        with pytest.raises(ValueError, match="diagonal"):
            QuadraticGame(mu=np.ones(2), K=np.eye(2), b=np.zeros(2))
        with pytest.raises(ValueError, match="b"):
            QuadraticGame(mu=np.ones(2), K=np.zeros((2, 2)), b=np.zeros(3))

    def test_singular_equilibrium_raises(self):
        game = QuadraticGame(
            mu=np.array([1.0, 1.0]),
            K=np.array([[0.0, -1.0], [-1.0, 0.0]]),
            b=np.zeros(2),
        )
        with pytest.raises(ValueError, match="unique"):
            game.nash_equilibrium()


class TestSimulations:
    GAME = QuadraticGame(
        mu=np.array([2.0, 2.0]),
        K=np.array([[0.0, 1.0], [1.0, 0.0]]),
        b=np.array([-2.0, -2.0]),
    )

    def test_pseudogradient_converges_to_nash(self):
        traj = simulate_pseudogradient(self.GAME, np.zeros(2), t_end=40.0)
        assert np.abs(traj.final_state - self.GAME.nash_equilibrium()).max() <= 1e-6

    def test_best_response_converges_to_nash(self):
        traj = simulate_best_response(self.GAME, np.array([5.0, -3.0]), t_end=60.0)
        assert np.abs(traj.final_state - self.GAME.nash_equilibrium()).max() <= 1e-6

    def test_explicit_timestep_accepted(self):
        traj = simulate_pseudogradient(self.GAME, np.zeros(2), t_end=40.0, dt=0.02)
        assert np.abs(traj.final_state - self.GAME.nash_equilibrium()).max() <= 1e-6

    def test_unstable_game_diverges(self):
        game = QuadraticGame(
            mu=np.array([1.0, 1.0]),
            K=np.array([[0.0, -3.0], [-3.0, 0.0]]),
            b=np.zeros(2),
        )
        with pytest.raises(DivergenceError) as err, np.errstate(over="ignore"):
            simulate_pseudogradient(game, np.array([1.0, 1.0]), t_end=400.0)
        assert err.value.time > 0
        assert err.value.partial is not None


class TestGameFile:
    def write(self, tmp_path, text):
        path = tmp_path / "g.game"
        path.write_text(text)
        return path

    def test_full_file(self, tmp_path):
        path = self.write(
            tmp_path,
            "# two symmetric players\n"
            "players 2\n"
            "mu: 2 2\n"
            "ell = 0 1 1 0\n"
            "K 0 1 1 0\n"
            "b -2 -2\n",
        )
        gf = read_game_file(path)
        assert gf.spec.players == 2
        assert np.array_equal(gf.spec.ell, [[0.0, 1.0], [1.0, 0.0]])
        assert gf.game is not None
        assert np.allclose(gf.game.nash_equilibrium(), [2.0 / 3.0, 2.0 / 3.0])

    def test_minimal_file_has_no_game(self, tmp_path):
        path = self.write(tmp_path, "players 2\nmu 1 1\nell 0 0.5 0.5 0\n")
        gf = read_game_file(path)
        assert gf.game is None
        assert gf.spec.mu.tolist() == [1.0, 1.0]

    def test_k_without_b_defaults_to_zero(self, tmp_path):
        path = self.write(tmp_path, "players 2\nmu 1 1\nell 0 0 0 0\nK 0 0 0 0\n")
        gf = read_game_file(path)
        assert np.array_equal(gf.game.b, [0.0, 0.0])

    def test_b_without_k_rejected(self, tmp_path):
        path = self.write(tmp_path, "players 2\nmu 1 1\nell 0 0 0 0\nb 1 1\n")
        with pytest.raises(ValueError, match="without K"):
            read_game_file(path)

    def test_missing_key_rejected(self, tmp_path):
        path = self.write(tmp_path, "players 2\nmu 1 1\n")
        with pytest.raises(ValueError, match="missing required key"):
            read_game_file(path)

    def test_wrong_count_rejected(self, tmp_path):
        path = self.write(tmp_path, "players 2\nmu 1 1 1\nell 0 0 0 0\n")
        with pytest.raises(ValueError, match="mu must list 2"):
            read_game_file(path)

    def test_duplicate_key_rejected(self, tmp_path):
        path = self.write(tmp_path, "players 2\nplayers 3\nmu 1 1\nell 0 0 0 0\n")
        with pytest.raises(ValueError, match="duplicate"):
            read_game_file(path)

    def test_malformed_number_rejected(self, tmp_path):
        path = self.write(tmp_path, "players 2\nmu one 1\nell 0 0 0 0\n")
        with pytest.raises(ValueError, match="malformed numeric"):
            read_game_file(path)
