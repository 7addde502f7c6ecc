import json
import math

import numpy as np
import pytest

import ggff
from ggff import (GaugeField, VertexSigns, apply_gauge_transform, green,
                  kl_isomorphism_check, loop_holonomy, loop_mass, occupation_field,
                  sample_loop_soup, soup_moments, split_by_holonomy,
                  negative_holonomy_mass)
from ggff.loopsoup import Loop, LoopSoupSampler, dump_loops_jsonl, soup_summary_dict

from conftest import random_network


def test_sampler_determinism(pt_net):
    s1 = sample_loop_soup(pt_net, 0.5, seed=1)
    s2 = sample_loop_soup(pt_net, 0.5, seed=1)
    assert [lp.skeleton for lp in s1.loops] == [lp.skeleton for lp in s2.loops]
    assert all(np.array_equal(a.holding_times, b.holding_times)
               for a, b in zip(s1.loops, s2.loops))


def test_return_probabilities_pt(pt_net):
    sampler = LoopSoupSampler(pt_net, 0.5)
    # elimination order x < y < z: from x every non-boundary jump returns;
    # from y (x removed) only y->z->y survives; z (x,y removed) has nothing
    assert sampler.return_prob[0] == pytest.approx(2 / 3, abs=1e-12)
    assert sampler.return_prob[1] == pytest.approx(1 / 4, abs=1e-12)
    assert sampler.return_prob[2] == pytest.approx(0.0, abs=1e-12)
    assert float(np.sum(sampler.level_mass)) == pytest.approx(loop_mass(pt_net), abs=1e-12)


def test_elimination_mass_matches_loop_mass_random():
    rng = np.random.default_rng(2)
    for _ in range(10):
        net, _ = random_network(rng, max_interior=8)
        sampler = LoopSoupSampler(net, 1.0)
        assert float(np.sum(sampler.level_mass)) == pytest.approx(loop_mass(net), abs=1e-10)


def test_loops_respect_interior_adjacency(pt_net):
    ints = set(pt_net.interior)
    for seed in range(50):
        soup = sample_loop_soup(pt_net, 0.7, seed=seed)
        for lp in soup.loops:
            assert set(lp.skeleton) <= ints
            assert np.all(lp.holding_times > 0)
            if not lp.is_point:
                cyc = lp.skeleton + (lp.skeleton[0],)
                for a, b in zip(cyc, cyc[1:]):
                    assert pt_net.has_edge(a, b)
                assert lp.skeleton[0] == min(lp.skeleton)  # rooted at minimum


def test_multi_vertex_count_poisson(pt_net):
    n = 10_000
    mom = soup_moments(pt_net, 0.5, n, seed=3)
    lam = mom.count_target
    assert lam == pytest.approx(0.5 * math.log(4), abs=1e-12)
    assert abs(mom.count_mean - lam) <= 3 * mom.count_se
    # variance equals the mean for a Poisson count; SE of the sample variance
    # for Poisson(lam) is sqrt((2 lam^2 + lam)/n)
    se_var = math.sqrt((2 * lam * lam + lam) / n)
    assert abs(mom.count_var - lam) <= 3 * se_var


def test_empty_soup_probability_small_alpha(pt_net):
    alpha = 1e-3
    lam = alpha * loop_mass(pt_net)
    n = 4000
    empty = sum(sample_loop_soup(pt_net, alpha, seed=s).multi_vertex_count() == 0
                for s in range(n))
    p = math.exp(-lam)
    assert abs(empty / n - p) <= 4 * math.sqrt(p * (1 - p) / n) + 1e-12


def test_occupation_field_empty_and_sums(pt_net):
    soup = sample_loop_soup(pt_net, 0.5, seed=9)
    occ = occupation_field(soup)
    manual = {v: 0.0 for v in pt_net.interior}
    for lp in soup.loops:
        for v, t in zip(lp.skeleton, lp.holding_times):
            manual[v] += float(t)
    assert occ.local_time == pytest.approx(manual)
    empty = ggff.LoopSoupSample(pt_net, (), 0.5, 0)
    assert all(t == 0.0 for t in occupation_field(empty).local_time.values())


def test_le_jan_occupation_moments(pt_net):
    mom = soup_moments(pt_net, 0.5, 10_000, seed=4)
    ix = mom.vertices.index("x")
    assert mom.occupation_mean_target[ix] == pytest.approx(0.5, abs=1e-12)
    assert mom.occupation_second_target[ix] == pytest.approx(0.75, abs=1e-12)
    assert np.all(np.abs(mom.occupation_mean - mom.occupation_mean_target)
                  <= 3 * mom.occupation_mean_se)
    assert np.all(np.abs(mom.occupation_second - mom.occupation_second_target)
                  <= 4 * mom.occupation_second_se)


def test_occupation_mean_alpha_one(pt_net):
    mom = soup_moments(pt_net, 1.0, 8_000, seed=5)
    assert np.all(np.abs(mom.occupation_mean - mom.occupation_mean_target)
                  <= 3 * mom.occupation_mean_se)


def test_one_point_convention_selected_by_le_jan_marginal(pt_net):
    """The jump-free duration rate must be W(x); the Green-diagonal variant
    overshoots the occupation mean far beyond noise."""
    n = 6_000
    alpha = 0.5
    g = green(pt_net)
    target = alpha * np.array([g.value(v, v) for v in pt_net.interior])

    def occupation_means(mode):
        sampler = LoopSoupSampler(pt_net, alpha, one_point_mode=mode)
        tot = np.zeros(len(pt_net.interior))
        tot2 = np.zeros(len(pt_net.interior))
        for s in range(n):
            occ = sampler.occupation_vector(sampler.sample(s))
            tot += occ
            tot2 += occ ** 2
        mean = tot / n
        se = np.sqrt(np.maximum(tot2 / n - mean ** 2, 0) / n)
        return mean, se

    mean_deg, se_deg = occupation_means("degree")
    assert np.all(np.abs(mean_deg - target) <= 4 * se_deg)
    mean_grn, se_grn = occupation_means("green")
    assert np.any((mean_grn - target) / se_grn > 5)  # systematic overshoot


def test_split_by_holonomy_partition_and_occupation(pt):
    net, gauge = pt
    for seed in range(30):
        soup = sample_loop_soup(net, 0.5, seed=seed)
        plus, minus = split_by_holonomy(soup, gauge)
        assert len(plus.loops) + len(minus.loops) == len(soup.loops)
        assert all(loop_holonomy(gauge, lp) == 1 for lp in plus.loops)
        assert all(loop_holonomy(gauge, lp) == -1 for lp in minus.loops)
        assert all(lp.is_point is False for lp in minus.loops)
        occ = occupation_field(soup).local_time
        op = occupation_field(plus).local_time
        om = occupation_field(minus).local_time
        for v in net.interior:
            assert occ[v] == pytest.approx(op[v] + om[v], abs=1e-12)


def test_split_trivial_gauge_negative_empty(pt_net):
    gauge = GaugeField.all_plus(pt_net)
    soup = sample_loop_soup(pt_net, 0.5, seed=8)
    _, minus = split_by_holonomy(soup, gauge)
    assert minus.loops == ()


def test_crafted_skeleton_even_traversals_positive(pt):
    net, gauge = pt
    lp = Loop(("x", "y", "z", "x", "z", "y"), np.ones(6))  # crosses yz twice
    assert loop_holonomy(gauge, lp) == 1
    lp2 = Loop(("y", "z"), np.ones(2))  # out-and-back over the -1 edge
    assert loop_holonomy(gauge, lp2) == 1
    lp3 = Loop(("x", "y", "z"), np.ones(3))  # the triangle
    assert loop_holonomy(gauge, lp3) == -1


def test_holonomy_classification_gauge_invariant():
    rng = np.random.default_rng(6)
    net, gauge = random_network(rng, max_interior=6)
    vs = VertexSigns(net, {v: (-1 if rng.random() < 0.5 else 1) for v in net.vertices})
    transformed = apply_gauge_transform(vs, gauge)
    for seed in range(20):
        soup = sample_loop_soup(net, 0.6, seed=seed)
        for lp in soup.loops:
            assert loop_holonomy(gauge, lp) == loop_holonomy(transformed, lp)


def test_negative_holonomy_count_mean(pt):
    net, gauge = pt
    mom = soup_moments(net, 0.5, 10_000, seed=7, gauge=gauge)
    assert mom.negative_count_target == pytest.approx(
        0.5 * negative_holonomy_mass(net, gauge), abs=1e-12)
    assert abs(mom.negative_count_mean - mom.negative_count_target) \
        <= 3 * mom.negative_count_se


def test_kl_isomorphism_check_pt(pt):
    net, gauge = pt
    rep = kl_isomorphism_check(net, gauge, 10_000, seed=8)
    assert np.all(np.abs(rep.mean_diff_se) <= 4)
    assert np.all(np.abs(rep.second_diff_se) <= 4)
    assert rep.domination_margin_se >= -4
    # analytic mean of both sides: (G(x,x) + G_sigma(x,x)) / 4
    g = green(net)
    gs = ggff.twisted_green(net, gauge)
    target = 0.25 * (np.diag(g.entries) + np.diag(gs.entries))
    assert np.all(np.abs(rep.left_mean - target) < 0.05)


def test_kl_trivial_gauge_reduces_to_le_jan(pt_net):
    gauge = GaugeField.all_plus(pt_net)
    rep = kl_isomorphism_check(pt_net, gauge, 5_000, seed=9)
    g = np.diag(green(pt_net).entries)
    assert np.all(np.abs(rep.left_mean - 0.5 * g) < 0.06)
    assert np.all(np.abs(rep.mean_diff_se) <= 4)


def test_soup_summary_and_dump(tmp_path, pt):
    net, gauge = pt
    soup = sample_loop_soup(net, 0.5, seed=10)
    summary = soup_summary_dict(soup, gauge)
    assert summary["n_loops_multi_vertex"] == soup.multi_vertex_count()
    assert set(summary["occupation_field"]) == set(net.interior)
    assert summary["counts_by_holonomy"]["+1"] + summary["counts_by_holonomy"]["-1"] \
        == soup.multi_vertex_count()
    path = tmp_path / "loops.jsonl"
    dump_loops_jsonl(soup, path)
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    assert len(lines) == len(soup.loops)
    assert all(len(l["skeleton"]) == len(l["holding_times"]) for l in lines)


def test_alpha_must_be_positive(pt_net):
    with pytest.raises(ValueError):
        sample_loop_soup(pt_net, 0.0, seed=0)
    with pytest.raises(ValueError):
        LoopSoupSampler(pt_net, 0.5, one_point_mode="bogus")
