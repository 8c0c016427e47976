import numpy as np
import pytest

from diffts import ConfigurationError, IngestionError, StructuralError
from diffts.environments import (FREE_MEAN, POPULAR_NICHE_DESK, WALL_MEAN, AuctionTask, GaussianTask, GridGraph,
                                 LabeledArmsDistribution, MazeTask, PopularNicheConfig, SuperArmStructure,
                                 auction_tasks_from_rates, corrupt, covering_paths, edges_from_bitmap,
                                 gen_labeled_arms, gen_maze, gen_popular_niche, gen_toy_groups,
                                 generate_perfect_maze, load_auction_tasks, make_problem, popular_niche_mean,
                                 recall_precision, relevant_groups, render_bitmap, shortest_path, step,
                                 toy_groups_dataset)

from conftest import all_paths


class TestPopularNiche:
    def test_ranges(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            mu = popular_niche_mean(rng).reshape(40, 5)
            assert np.all((mu >= 0) & (mu <= 1))
            assert np.all(mu[:20] <= 0.95)

    def test_unperturbed_structure(self):
        cfg = PopularNicheConfig(perturb_std=0.0)
        rng = np.random.default_rng(1)
        for _ in range(50):
            g = popular_niche_mean(rng, cfg).reshape(40, 5)
            pop = np.all(g[:20] == 0.8, axis=1)
            assert 15 <= pop.sum() <= 17 and np.all(g[:20][~pop] == 0)
            niche = np.any(g[20:] > 0, axis=1)
            assert niche.sum() <= 3 and set(np.unique(g[20:])) <= {0.0, 1.0}

    def test_desk_task(self):
        t = gen_popular_niche(np.random.default_rng(2), POPULAR_NICHE_DESK)
        assert t.n_arms == 50 and t.noise_std == 0.1


class TestLabeledArms:
    def test_formula(self):
        dist = LabeledArmsDistribution(np.random.default_rng(0))
        labels = np.flatnonzero(dist.arm_labels[0])
        base = dist.base_mean(labels)
        assert base[0] == pytest.approx(1 - 4.0 ** -7) and base[0] == pytest.approx(0.999939, abs=1e-6)
        inter = dist.arm_labels[:, labels].sum(1)
        assert np.allclose(base[inter == 0], 0) and np.allclose(base[inter == 1], 0.75)

    def test_scaled(self):
        rng = np.random.default_rng(1)
        t = gen_labeled_arms(rng, LabeledArmsDistribution(rng))
        assert t.n_arms == 500 and t.mu.min() == 0 and t.mu.max() == pytest.approx(1)
        assert np.all(LabeledArmsDistribution(rng).arm_labels.sum(1) == 7)


class TestToyGroups:
    def test_values(self):
        rng = np.random.default_rng(0)
        x = toy_groups_dataset(rng, 500)
        assert set(np.unique(x)) <= {0.0, 1.0}
        counts = relevant_groups(x).sum(1)
        assert counts.min() == 0 and counts.max() == 6

    def test_zero_groups(self):
        rng = np.random.default_rng(0)
        xs = [gen_toy_groups(rng) for _ in range(200)]
        assert any(not x.any() for x in xs)

    def test_recall_on_truth(self):
        x = toy_groups_dataset(np.random.default_rng(0), 100)
        assert recall_precision(x, x) == (1.0, 1.0)

    def test_recall_example(self):
        truth = np.zeros((1, 200))
        truth[0, :20] = 1
        recon = np.zeros((1, 200))
        recon[0, :10] = 0.9
        recon[0, 50:60] = 0.9
        assert recall_precision(truth, recon) == (0.5, 0.5)


class TestCorrupt:
    def test_identity(self, rng):
        x = rng.random((10, 4))
        d = corrupt(x, 0.0, 0.0, rng)
        assert np.all(d.mask) and np.array_equal(d.y, x)

    def test_rates(self):
        rng = np.random.default_rng(0)
        x = np.zeros((1000, 100))
        d = corrupt(x, 0.5, 0.0, rng)
        assert 0.49 <= 1 - d.mask.mean() <= 0.51
        noisy = corrupt(x, 0.0, 0.1, rng)
        assert 0.099 <= noisy.y.std() <= 0.101
        assert np.all(d.y[~d.mask] == 0)

    def test_bad_p(self, rng):
        with pytest.raises(ConfigurationError):
            corrupt(np.zeros((2, 2)), 1.0, 0.0, rng)


class TestMaze:
    def test_means_and_spanning_tree(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            t = gen_maze(rng)
            assert set(np.unique(t.mu)) == {WALL_MEAN, FREE_MEAN}
            assert (t.mu == FREE_MEAN).sum() == 99
            path = t.optimal_path()
            assert t.structure.is_path(path) and np.all(t.mu[path] == FREE_MEAN)
            assert t.best_mean() == pytest.approx(FREE_MEAN * len(path))

    def test_bitmap(self):
        g = GridGraph(10)
        open_edges = generate_perfect_maze(np.random.default_rng(3))
        walls = render_bitmap(g, open_edges)
        assert walls.shape == (20, 20) and walls[-1].all() and walls[:, -1].all()
        assert np.array_equal(edges_from_bitmap(g, walls), open_edges)
        pixels = {g.edge_pixel(e) for e in range(g.n_edges)}
        assert len(pixels) == 180
        assert all((i + j) % 2 == 1 for i, j in pixels)

    def test_edge_indexing(self):
        g = GridGraph(10)
        assert g.edge_between(0, 1) == 0 and g.edge_between(0, 10) == 90
        for e in range(g.n_edges):
            assert g.edge_between(*g.edge_nodes(e)) == e
        with pytest.raises(StructuralError):
            g.edge_between(0, 11)

    def test_regret_brute_force(self):
        rng = np.random.default_rng(4)
        struct = SuperArmStructure.corners(3)
        paths = all_paths(struct)
        for _ in range(10):
            t = MazeTask(np.where(generate_perfect_maze(rng, 3), FREE_MEAN, WALL_MEAN), struct)
            best = max(t.mu[p].sum() for p in paths)
            for p in paths[:5]:
                _, regret = step(t, p, rng)
                assert regret == pytest.approx(best - t.mu[p].sum())

    def test_covering_paths_small_side(self):
        with pytest.raises(StructuralError):
            covering_paths(2)
        assert len(covering_paths(3)) == 3

    def test_semi_bandit_feedback(self, rng):
        t = gen_maze(rng)
        rewards, _ = step(t, t.optimal_path(), rng)
        assert len(rewards) == len(t.optimal_path())

    def test_structure_validation(self):
        with pytest.raises(StructuralError):
            SuperArmStructure(GridGraph(3), 4, 4)
        with pytest.raises(ValueError):
            shortest_path(SuperArmStructure.corners(3), -np.ones(12))


class TestAuction:
    def _rates(self, rng, n=4):
        return rng.random((n, 300))

    def test_normalisation(self, rng):
        rates = self._rates(rng)
        rates[2, 0] = 1.0
        tasks = auction_tasks_from_rates(rates)
        assert max(t.best_mean() for t in tasks) == pytest.approx(1.0)
        assert tasks[2].mu[0] == pytest.approx(1.0)

    def test_zero_win_rate(self, rng):
        rates = self._rates(rng)
        rates[0, 10] = 0.0
        assert auction_tasks_from_rates(rates)[0].mu[10] == 0.0

    def test_mc_mean(self):
        rng = np.random.default_rng(0)
        t = auction_tasks_from_rates(self._rates(rng, 1))[0]
        arm = 37
        r = t.draw(np.full(100000, arm), rng)
        assert abs(r.mean() - t.mu[arm]) < 4 * r.std() / np.sqrt(len(r))
        assert np.allclose(t.mu, t.win_rates * t.payoffs)

    def test_load_and_bad_row(self, tmp_path, rng):
        p = tmp_path / "rates.csv"
        rates = self._rates(rng, 3)
        p.write_text("\n".join(",".join(f"{v:.6f}" for v in row) for row in rates) + "\n")
        assert len(load_auction_tasks(p)) == 3
        p.write_text(",".join(["0.5"] * 300) + "\n" + ",".join(["0.5"] * 299) + "\n")
        with pytest.raises(IngestionError) as exc:
            load_auction_tasks(p)
        assert exc.value.row == 2

    def test_win_rate_range(self):
        with pytest.raises(ConfigurationError):
            AuctionTask(np.array([1.5]), np.array([1.0]))


class TestStep:
    def test_optimal_zero_regret(self, rng):
        t = GaussianTask(np.array([0.2, 0.9, 0.5]))
        assert step(t, 1, rng)[1] == 0.0

    def test_two_arm(self, rng):
        assert step(GaussianTask(np.array([1.0, 0.0])), 1, rng)[1] == 1.0

    def test_bad_arm(self, rng):
        with pytest.raises(IndexError):
            step(GaussianTask(np.array([1.0, 0.0])), 2, rng)


class TestRegistry:
    @pytest.mark.parametrize("name,dim", [("popular_niche", 200), ("popular_niche_desk", 50),
                                          ("labeled_arms", 500), ("maze", 180), ("toy_groups", 200)])
    def test_dims(self, name, dim, rng):
        prob = make_problem(name)
        mu = prob.means(rng, 2)
        assert mu.shape == (2, dim)
        assert prob.to_task(mu[0]).n_arms == dim

    def test_unknown(self):
        with pytest.raises(ConfigurationError):
            make_problem("nope")
