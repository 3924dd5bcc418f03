"""Naming grammar, packet model, and source-side encoding."""

import numpy as np
import pytest

from micnsim.content import (CodedSegment, Generation, InterestPacket, NameParseError,
                             encode_name, make_generation, parse_name,
                             segment_payload, source_reply)
from micnsim.gf import Field, RrefBasis
from micnsim.milic import subset_of


@pytest.fixture(scope="module")
def gf256():
    return Field(8)


class TestGeneration:
    def test_equal_sizes_enforced(self):
        with pytest.raises(ValueError):
            Generation("/v", 0, (b"abc", b"de"))

    def test_make_generation(self):
        gen = make_generation("/v", 1, 5, 16, np.random.default_rng(0))
        assert gen.n == 5
        assert gen.segment_size == 16
        assert len(set(gen.segments)) == 5


class TestNames:
    def test_last_index_single_coefficient(self):
        vec = np.zeros(7, dtype=np.uint8)
        vec[6] = 1
        seg = CodedSegment("/video", 1, 7, vec, np.zeros(4, dtype=np.uint8))
        assert encode_name(seg) == "/video/micn/1/7/1"

    def test_coefficients_from_index_onward(self):
        vec = np.array([0, 0, 2, 0, 7], dtype=np.uint8)
        seg = CodedSegment("/video", 1, 3, vec, np.zeros(4, dtype=np.uint8))
        assert encode_name(seg) == "/video/micn/1/3/2,0,7"

    def test_interest_name(self):
        pkt = InterestPacket("/video", 1, 3, nonce=42)
        assert pkt.name() == "/video/micn/1/3"

    def test_parse_interest(self):
        parsed = parse_name("/video/micn/1/3")
        assert parsed.coded and not parsed.is_data
        assert parsed.prefix == "/video"
        assert parsed.generation_id == 1
        assert parsed.index == 3

    def test_parse_data_reconstructs_vector(self):
        parsed = parse_name("/video/micn/1/3/2,0,7")
        assert parsed.is_data
        assert parsed.index == 3
        assert np.array_equal(parsed.vector, np.array([0, 0, 2, 0, 7], dtype=np.uint8))

    def test_plain_name_falls_through(self):
        parsed = parse_name("/video/plain/1/3")
        assert not parsed.coded
        assert parsed.prefix == "/video/plain/1"
        assert parsed.segment == 3

    def test_roundtrip_random(self, gf256):
        rng = np.random.default_rng(1)
        for _ in range(10_000):
            n = int(rng.integers(1, 12))
            i = int(rng.integers(1, n + 1))
            vec = np.zeros(n, dtype=np.uint8)
            vec[i - 1] = rng.integers(1, 256)
            if i < n:
                vec[i:] = rng.integers(0, 256, size=n - i)
            seg = CodedSegment("/a/b", 2, i, vec, np.zeros(1, dtype=np.uint8))
            parsed = parse_name(encode_name(seg))
            assert parsed.prefix == "/a/b"
            assert parsed.generation_id == 2
            assert parsed.index == i
            assert np.array_equal(parsed.vector, vec)

    @pytest.mark.parametrize("bad", [
        "video/micn/1/3",          # missing leading slash
        "/video/micn/1",           # no index
        "/video/micn/x/3",         # generation not an integer
        "/video/micn/1/y",         # index not an integer
        "/video/micn/1/0",         # index < 1
        "/video/micn/1/3/0,1,2",   # leading coefficient zero
        "/video/micn/1/3/2,zz",    # junk coefficient
        "/video/micn/1/3/2,999",   # coefficient out of field range
        "/video",                  # no segment component
    ])
    def test_malformed_names_raise_with_position(self, bad):
        with pytest.raises(NameParseError) as err:
            parse_name(bad)
        assert err.value.position >= 0

    def test_vector_index_consistency_enforced(self):
        vec = np.array([0, 5, 0], dtype=np.uint8)
        with pytest.raises(ValueError):
            CodedSegment("/v", 0, 3, vec, np.zeros(1, dtype=np.uint8))

    def test_segment_payload_checks_name_against_vector(self):
        seg = CodedSegment("/v", 1, 2, np.array([0, 3, 9], dtype=np.uint8),
                           np.zeros(1, dtype=np.uint8))
        assert segment_payload(seg, encode_name(seg))
        assert not segment_payload(seg, "/v/micn/1/2/3,8")
        assert not segment_payload(seg, "/v/micn/1/2")


class TestSourceReply:
    def test_single_segment_scalar(self, gf256):
        gen = make_generation("/v", 0, 1, 8, np.random.default_rng(2))
        rng = np.random.default_rng(3)
        seg = source_reply(gen, 1, gf256, rng)
        alpha = int(seg.vector[0])
        assert alpha != 0
        expect = gf256.scale(np.frombuffer(gen.segments[0], dtype=np.uint8), alpha)
        assert np.array_equal(seg.payload, expect)

    def test_last_index_scales_last_segment(self, gf256):
        gen = make_generation("/v", 0, 6, 8, np.random.default_rng(4))
        rng = np.random.default_rng(5)
        seg = source_reply(gen, 6, gf256, rng)
        assert subset_of(seg.vector) == 6
        alpha = int(seg.vector[5])
        expect = gf256.scale(np.frombuffer(gen.segments[5], dtype=np.uint8), alpha)
        assert np.array_equal(seg.payload, expect)

    def test_one_reply_per_subset_decodes(self, gf256):
        gen = make_generation("/v", 0, 8, 32, np.random.default_rng(6))
        rng = np.random.default_rng(7)
        basis = RrefBasis(gf256, gen.n, payload_size=gen.segment_size)
        for i in range(1, gen.n + 1):
            seg = source_reply(gen, i, gf256, rng)
            assert basis.insert(seg.vector, seg.payload)
        assert tuple(basis.decode()) == gen.segments

    def test_payload_rederivable_from_named_coefficients(self, gf256):
        gen = make_generation("/v", 0, 5, 16, np.random.default_rng(8))
        rng = np.random.default_rng(9)
        for i in (1, 3, 5):
            seg = source_reply(gen, i, gf256, rng)
            parsed = parse_name(encode_name(seg))
            rebuilt = np.zeros(gen.segment_size, dtype=np.uint8)
            for j, c in enumerate(parsed.vector):
                gf256.addmul_into(rebuilt, np.frombuffer(gen.segments[j], dtype=np.uint8), int(c))
            assert np.array_equal(rebuilt, seg.payload)
