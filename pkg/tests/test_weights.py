import numpy as np
import pytest

from decayalg.weights import Weight, grs_sequence, verify_axioms

# the parameter grid exercised throughout: amplitudes/powers kept small so
# window checks stay well-conditioned
FAMILY = [
    Weight(a=a, b=b, s=s, t=t)
    for a in (0.0, 0.5)
    for b in (0.0, 0.5)
    for s in (0.0, 1.0, 2.0)
    for t in (0.0, 1.0)
]


def test_constant_weight_is_one():
    w = Weight()
    for n in [0, 3, -7, (2,), (5, -5)]:
        assert w.eval(n) == 1.0


def test_polynomial_value_l1():
    # (1 + |3|)^2 = 16 with the l1 index norm
    w = Weight(s=2.0)
    assert w.eval((3,)) == 16.0
    assert w.eval((1, 2)) == 16.0  # l1 magnitude 3 again


def test_unit_value_is_exact():
    for w in FAMILY:
        assert w.eval(0) == 1.0
        assert w.eval((0, 0, 0)) == 1.0


def test_symmetry_bitwise():
    w = Weight(a=0.5, b=0.5, s=1.0, t=1.0)
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = tuple(rng.integers(-20, 21, size=2))
        m = tuple(-v for v in n)
        assert w.eval(n) == w.eval(m)


def test_closed_form_value():
    # frozen by hand: g(n) = exp(0.5*sqrt(7)) * 8 * ln(e+7) at |n|_1 = 7
    w = Weight(a=0.5, b=0.5, s=1.0, t=1.0)
    expected = np.exp(0.5 * np.sqrt(7.0)) * 8.0 * np.log(np.e + 7.0)
    assert w.eval((3, -4)) == pytest.approx(expected, rel=1e-15)


def test_parameter_validation():
    with pytest.raises(ValueError):
        Weight(b=1.0)
    with pytest.raises(ValueError):
        Weight(a=-0.1)
    with pytest.raises(ValueError):
        Weight(s=-1.0)
    with pytest.raises(ValueError):
        Weight(t=-0.5)
    with pytest.raises(ValueError):
        Weight(index_norm="l3")


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_index_norm_choices(norm):
    w = Weight(s=1.0, index_norm=norm)
    mag = {"l1": 7.0, "l2": 5.0, "linf": 4.0}[norm]
    assert w.eval((3, -4)) == pytest.approx(1.0 + mag, rel=1e-15)


@pytest.mark.parametrize("c", [1, 2])
def test_axioms_pass_on_window(c):
    for w in FAMILY:
        report = verify_axioms(w, window_radius=8, c=c)
        assert report.all_pass, (w, [ch for ch in report.checks if not ch.passed])


def test_axioms_pass_c3_small():
    # 3-d window at a reduced radius keeps the pair check affordable
    for w in (Weight(a=0.5, b=0.5, s=1.0), Weight(s=2.0, t=1.0)):
        report = verify_axioms(w, window_radius=4, c=3)
        assert report.all_pass


def test_axioms_l2_and_linf():
    for norm in ("l2", "linf"):
        report = verify_axioms(Weight(a=0.5, b=0.5, s=2.0, index_norm=norm), 6, c=2)
        assert report.all_pass


def test_submultiplicativity_witness_reported():
    report = verify_axioms(Weight(s=2.0), 5, c=1)
    sub = report["submultiplicative"]
    assert sub.passed
    assert sub.worst <= 1.0 + 1e-12
    assert sub.witness is not None


def test_grs_constant_weight_all_zero():
    seq = grs_sequence(Weight(), t=(1,), n_max=10)
    assert np.all(seq == 0.0)


def test_grs_polynomial_closed_form():
    # ln (1+n)^2 / n; at n = 100 this is 2 ln(101)/100
    seq = grs_sequence(Weight(s=2.0), t=(1,), n_max=100)
    assert seq[-1] == pytest.approx(2.0 * np.log(101.0) / 100.0, rel=1e-14)
    assert seq[-1] <= 0.1
    assert seq[-1] <= seq[0]


def test_grs_subexponential_tail():
    # a n^b / n = n^(b-1); at n = 1e4, b = 0.5 the tail sits at 0.01
    seq = grs_sequence(Weight(a=1.0, b=0.5), t=(1,), n_max=10000)
    assert seq[-1] == pytest.approx(0.01, rel=1e-12)
    assert seq[-1] <= 0.02


def test_grs_rejects_zero_direction():
    with pytest.raises(ValueError):
        grs_sequence(Weight(s=1.0), t=(0, 0), n_max=10)


def test_grs_tail_below_head():
    # the sequence drains toward 0: tail average under head average
    for w in FAMILY:
        seq = grs_sequence(w, t=(1,), n_max=200)
        head = seq[:20].mean()
        tail = seq[-20:].mean()
        if w.a == 0 and w.s == 0 and w.t == 0:
            assert np.all(seq == 0.0)
        else:
            assert tail < head


def test_json_round_trip():
    w = Weight(a=0.5, b=0.25, s=2.0, t=1.0, index_norm="l2")
    assert Weight.from_json(w.to_json()) == w
