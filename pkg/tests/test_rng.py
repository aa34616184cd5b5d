"""Known-answer and behavioral tests for the deterministic generator."""

import math

import pytest

from decayalg.rng import Xoshiro256StarStar, splitmix64


def test_splitmix64_known_answers():
    # widely published first outputs for counter = 0
    x, z = splitmix64(0)
    assert z == 0xE220A8397B1DCDAF
    x, z = splitmix64(x)
    assert z == 0x6E789E6AA1B965F4
    x, z = splitmix64(x)
    assert z == 0x06C45D188009454F


def test_xoshiro_reference_sequence():
    # force the canonical reference state (1, 2, 3, 4)
    gen = Xoshiro256StarStar(0)
    gen._s = [1, 2, 3, 4]
    assert gen.next_u64() == 11520
    assert gen.next_u64() == 0
    assert gen.next_u64() == 1509978240
    # fourth output, verified by stepping the update rule by hand
    assert gen.next_u64() == 1215971899390074240


def test_streams_are_reproducible_and_distinct():
    a = Xoshiro256StarStar(7, stream=0)
    b = Xoshiro256StarStar(7, stream=0)
    assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]
    c = Xoshiro256StarStar(7, stream=1)
    d = Xoshiro256StarStar(8, stream=0)
    first = Xoshiro256StarStar(7, stream=0).next_u64()
    assert c.next_u64() != first
    assert d.next_u64() != first


def test_uniform_range_and_moments():
    gen = Xoshiro256StarStar(123)
    xs = [gen.uniform() for _ in range(20000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    mean = sum(xs) / len(xs)
    assert mean == pytest.approx(0.5, abs=0.02)
    assert gen.uniform_in(2.0, 4.0) >= 2.0


def test_normal_moments():
    gen = Xoshiro256StarStar(99)
    xs = [gen.normal() for _ in range(20000)]
    mean = sum(xs) / len(xs)
    var = sum((x - mean) ** 2 for x in xs) / len(xs)
    assert mean == pytest.approx(0.0, abs=0.05)
    assert var == pytest.approx(1.0, abs=0.05)
    # the cached second value keeps the stream aligned
    g1 = Xoshiro256StarStar(5)
    g2 = Xoshiro256StarStar(5)
    seq1 = [g1.normal() for _ in range(7)]
    seq2 = [g2.normal() for _ in range(7)]
    assert seq1 == seq2


def test_complex_normal_draws_real_then_imaginary():
    g1 = Xoshiro256StarStar(11)
    g2 = Xoshiro256StarStar(11)
    z = g1.complex_normal()
    assert z.real == g2.normal()
    assert z.imag == g2.normal()
    assert math.isfinite(abs(z))
