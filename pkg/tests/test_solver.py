import io

import pytest

from muxlci import (
    GreedyConfig,
    InfluenceGraph,
    MultiplexNetwork,
    brute_force_optimal,
    couple_clique_lossless,
    export_ilp,
    improved_greedy,
    marginal_gain,
    meets_fraction,
    multiplex_lt_propagate,
    naive_greedy,
)
from muxlci.coupling import CoupledNetwork, NodeKind

from conftest import make_layer, random_network
from lp_solve import parse_lp, solve_lp_minimum


def flat_coupled(names, edges, thetas):
    """Single-graph instance where every node is seedable (hop scale 1)."""
    graph = InfluenceGraph(names, edges, thetas)
    identity = {n: n for n in names}
    kinds = {n: NodeKind("user", n) for n in names}
    return CoupledNetwork(graph, kinds, dict(identity), dict(identity), 1, "lossy-average", 1, len(names))


class TestMarginalGain:
    def test_already_covered_candidate_contributes_nothing(self):
        coupled = flat_coupled(
            ["a", "b"], [("a", "b", 1.0)], {"a": 0.5, "b": 0.5}
        )
        assert marginal_gain(coupled, {"a"}, "b", GreedyConfig(1.0, 2)) == 0.0

    def test_isolated_candidate_adds_itself(self):
        coupled = flat_coupled(["a", "b", "c"], [], {"a": 0.5, "b": 0.5, "c": 0.5})
        assert marginal_gain(coupled, {"a"}, "c", GreedyConfig(1.0, 1)) == 1.0

    def test_selected_candidate_rejected(self):
        coupled = flat_coupled(["a", "b"], [], {"a": 0.5, "b": 0.5})
        with pytest.raises(ValueError, match="already selected"):
            marginal_gain(coupled, {"a"}, "a", GreedyConfig(1.0, 1))

    def test_non_domain_candidate_rejected(self, four_user_three_layer):
        coupled = couple_clique_lossless(four_user_three_layer)
        with pytest.raises(ValueError, match="not a seedable"):
            marginal_gain(coupled, set(), "red@1", GreedyConfig(0.5, 1))

    def test_initial_gains_match_single_seed_simulations(self):
        network = random_network(61, max_users=12)
        coupled = couple_clique_lossless(network)
        cfg = GreedyConfig(0.9, 2)
        from muxlci import lt_propagate

        for node in coupled.user_of:
            expected = lt_propagate(coupled.graph, [node], coupled.hop_scale * cfg.hops).coverage_count
            assert marginal_gain(coupled, set(), node, cfg, base_coverage=0.0) == expected


class TestNaiveGreedy:
    def test_path_head_covers_everything(self):
        names = [f"p{i}" for i in range(6)]
        edges = [(a, b, 1.0) for a, b in zip(names, names[1:])]
        coupled = flat_coupled(names, edges, {n: 0.5 for n in names})
        seed_set = naive_greedy(coupled, GreedyConfig(1.0, len(names)))
        assert seed_set.users == ["p0"]
        assert seed_set.achieved_fraction == 1.0

    def test_achieves_requested_fraction(self):
        network = random_network(71, max_users=25)
        coupled = couple_clique_lossless(network)
        cfg = GreedyConfig(0.6, 3)
        seed_set = naive_greedy(coupled, cfg)
        assert seed_set.achieved_fraction >= 0.6 - 1e-9
        replay = multiplex_lt_propagate(network, set(seed_set.users), 3)
        assert meets_fraction(replay.coverage_count, 0.6, len(network.universe))

    def test_gain_log_matches_selection_order(self):
        network = random_network(73, max_users=15)
        coupled = couple_clique_lossless(network)
        cfg = GreedyConfig(0.7, 2)
        seed_set = naive_greedy(coupled, cfg)
        assert len(seed_set.gains) == len(seed_set.users)
        nodes = [coupled.node_of_user[u] for u in seed_set.users]
        for i, node in enumerate(nodes):
            fresh = marginal_gain(coupled, set(nodes[:i]), node, cfg)
            assert seed_set.gains[i] == pytest.approx(fresh)


class TestImprovedGreedy:
    def test_single_seed_when_beta_tiny(self):
        network = random_network(83, max_users=20)
        coupled = couple_clique_lossless(network)
        seed_set = improved_greedy(coupled, GreedyConfig(0.05, 2))
        assert len(seed_set.users) == 1

    def test_degenerate_parameters_equal_naive(self):
        for seed in (91, 92, 93):
            network = random_network(seed, max_users=25)
            coupled = couple_clique_lossless(network)
            reference = naive_greedy(coupled, GreedyConfig(0.6, 2))
            collapsed = improved_greedy(
                coupled, GreedyConfig(0.6, 2, T=len(coupled.user_of), R=1)
            )
            assert collapsed.users == reference.users
            assert collapsed.gains == pytest.approx(reference.gains)

    def test_default_parameters_match_naive_size(self):
        for seed in (101, 102, 103, 104):
            network = random_network(seed, max_users=30)
            coupled = couple_clique_lossless(network)
            assert len(improved_greedy(coupled, GreedyConfig(0.5, 3)).users) == len(
                naive_greedy(coupled, GreedyConfig(0.5, 3)).users
            )

    def test_logged_gains_are_fresh(self):
        network = random_network(107, max_users=20)
        coupled = couple_clique_lossless(network)
        cfg = GreedyConfig(0.7, 2)
        seed_set = improved_greedy(coupled, cfg)
        nodes = [coupled.node_of_user[u] for u in seed_set.users]
        for i, node in enumerate(nodes):
            fresh = marginal_gain(coupled, set(nodes[:i]), node, cfg)
            assert seed_set.gains[i] == pytest.approx(fresh)

    def test_deterministic(self):
        network = random_network(109, max_users=25)
        coupled = couple_clique_lossless(network)
        a = improved_greedy(coupled, GreedyConfig(0.6, 3))
        b = improved_greedy(coupled, GreedyConfig(0.6, 3))
        assert a.users == b.users and a.gains == b.gains


class TestBruteForce:
    def test_two_isolated_users_need_two_seeds(self):
        network = MultiplexNetwork([make_layer(1, {}, {"a": 0.5, "b": 0.5})])
        seed_set = brute_force_optimal(network, 1.0, 2)
        assert sorted(seed_set.users) == ["a", "b"]

    def test_single_seed_when_cascade_reaches_target(self):
        layer = make_layer(
            1, {("a", "b"): 1.0, ("b", "c"): 1.0}, {"a": 0.5, "b": 0.5, "c": 0.5}
        )
        network = MultiplexNetwork([layer])
        seed_set = brute_force_optimal(network, 1.0, 2)
        assert seed_set.users == ["a"]

    def test_cap_enforced(self):
        from muxlci import SynthSpec, generate

        network = generate(SynthSpec(30, [(30, 0.05)], None, 113))
        with pytest.raises(ValueError, match="brute-force cap"):
            brute_force_optimal(network, 0.5, 2)

    def test_minimality_by_exhaustive_check(self):
        network = random_network(127, max_users=9)
        beta, hops = 0.7, 2
        optimum = brute_force_optimal(network, beta, hops, max_users=22)
        n = len(network.universe)
        import itertools

        for size in range(len(optimum.users)):
            for combo in itertools.combinations(sorted(network.universe), size):
                outcome = multiplex_lt_propagate(network, set(combo), hops)
                assert not meets_fraction(outcome.coverage_count, beta, n)

    def test_greedy_never_beats_optimum(self):
        network = random_network(137, max_users=8)
        optimum = brute_force_optimal(network, 0.6, 2)
        coupled = couple_clique_lossless(network)
        greedy = improved_greedy(coupled, GreedyConfig(0.6, 2))
        assert len(greedy.users) >= len(optimum.users)


class TestIlpExport:
    def test_single_node_program(self):
        coupled = flat_coupled(["v"], [], {"v": 0.5})
        buffer = io.StringIO()
        summary = export_ilp(coupled, GreedyConfig(1.0, 1), buffer)
        text = buffer.getvalue()
        assert summary == {"variables": 2, "constraints": 3, "nodes": 1, "rounds": 1}
        assert "Minimize" in text and "Binaries" in text and text.rstrip().endswith("End")
        c, matrix, lower, names = parse_lp(text)
        assert names == ["x_v_0", "x_v_1"]
        assert list(c) == [1.0, 0.0]

    def test_triangle_constraint_counts(self):
        names = ["a", "b", "c"]
        edges = [("a", "b", 0.6), ("b", "c", 0.6), ("c", "a", 0.6)]
        coupled = flat_coupled(names, edges, {n: 0.5 for n in names})
        buffer = io.StringIO()
        summary = export_ilp(coupled, GreedyConfig(1.0, 2), buffer)
        assert summary["variables"] == 9
        assert summary["constraints"] == 1 + 6 + 6
        text = buffer.getvalue()
        assert text.count("act_") == 6
        assert text.count("mono_") == 6
        assert text.count("cover:") == 1

    @pytest.mark.parametrize("seed,beta", [(139, 0.6), (140, 0.5), (141, 0.8)])
    def test_solved_program_matches_brute_force(self, seed, beta):
        # dual route: exhaustive search on the network vs an external
        # MILP solver on the exported program
        network = random_network(seed, max_users=8)
        optimum = brute_force_optimal(network, beta, 2)
        coupled = couple_clique_lossless(network)
        buffer = io.StringIO()
        export_ilp(coupled, GreedyConfig(beta, 2), buffer)
        assert solve_lp_minimum(buffer.getvalue()) == len(optimum.users)

    def test_weight_mode_program_matches_brute_force(self):
        from muxlci import couple_reduced

        for seed in (143, 144):
            network = random_network(seed, max_users=8)
            optimum = brute_force_optimal(network, 0.6, 2)
            reduced = couple_reduced(network, "clique")
            buffer = io.StringIO()
            export_ilp(reduced, GreedyConfig(0.6, 2, coverage_mode="weight"), buffer)
            assert solve_lp_minimum(buffer.getvalue()) == len(optimum.users)

    def test_colliding_sanitized_names_fall_back_to_indices(self):
        coupled = flat_coupled(
            ["a@g", "a_g"], [("a@g", "a_g", 1.0)], {"a@g": 0.5, "a_g": 0.5}
        )
        buffer = io.StringIO()
        export_ilp(coupled, GreedyConfig(1.0, 1), buffer)
        _, _, _, names = parse_lp(buffer.getvalue())
        assert names == ["x_n0_0", "x_n0_1", "x_n1_0", "x_n1_1"]

    def test_weight_mode_uses_node_weights(self, two_layer_toy):
        from muxlci import couple_reduced

        coupled = couple_reduced(two_layer_toy, "clique")
        buffer = io.StringIO()
        export_ilp(coupled, GreedyConfig(0.5, 1, coverage_mode="weight"), buffer)
        text = buffer.getvalue()
        assert "mode=weight" in text.splitlines()[0]

    def test_deterministic_output(self, four_user_three_layer):
        coupled = couple_clique_lossless(four_user_three_layer)
        bufs = []
        for _ in range(2):
            buffer = io.StringIO()
            export_ilp(coupled, GreedyConfig(0.4, 2), buffer)
            bufs.append(buffer.getvalue())
        assert bufs[0] == bufs[1]


def test_config_validation():
    with pytest.raises(ValueError, match="beta"):
        GreedyConfig(0.0, 2)
    with pytest.raises(ValueError, match="hops"):
        GreedyConfig(0.5, 0)
    with pytest.raises(ValueError, match="T and R"):
        GreedyConfig(0.5, 2, T=0)
    with pytest.raises(ValueError, match="coverage mode"):
        GreedyConfig(0.5, 2, coverage_mode="area")
