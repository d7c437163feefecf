import numpy as np
import pytest

from gfdecode.ldpc import (
    AlistParseError,
    ParityCheckMatrix,
    bipolar_to_bits,
    bits_to_bipolar,
    check_parity,
    gf2_nullspace,
    gf2_rank,
    parse_alist,
    random_codeword,
    sign_decision,
    write_alist,
)

from conftest import H3X6_ALIST, H3X6_ALIST_PADDED, H3X6_DENSE


REP2_ALIST = """\
2 1
1 2
1 1
2
1
1
1 2
"""


class TestParseAlist:
    def test_single_check(self):
        H = parse_alist(REP2_ALIST)
        assert (H.m, H.n, H.e) == (1, 2, 2)
        assert list(H.rows[0]) == [0, 1]

    def test_appendix_matrix(self):
        H = parse_alist(H3X6_ALIST)
        assert H.e == 8
        assert list(H.rows[0]) == [0, 1, 2]
        assert list(H.rows[1]) == [2, 3]
        assert list(H.rows[2]) == [3, 4, 5]
        assert np.array_equal(H.to_dense(), H3X6_DENSE)

    def test_padded_variant_parses_identically(self):
        a = parse_alist(H3X6_ALIST)
        b = parse_alist(H3X6_ALIST_PADDED)
        assert np.array_equal(a.to_dense(), b.to_dense())

    def test_regular_code_degrees_by_direct_count(self, code204):
        # oracle: recount degrees from the dense matrix
        dense = code204.to_dense(np.int64)
        assert (code204.m, code204.n) == (102, 204)
        assert np.all(dense.sum(axis=1) == 6)
        assert np.all(dense.sum(axis=0) == 3)
        assert code204.e == dense.sum()

    def test_malformed_header(self):
        with pytest.raises(AlistParseError) as exc:
            parse_alist("2\n1 1\n")
        assert exc.value.line == 1

    def test_index_out_of_range(self):
        bad = "2 1\n1 1\n1 1\n2\n9\n1\n1 2\n"  # column 1 cites row 9 of 1
        with pytest.raises(AlistParseError) as exc:
            parse_alist(bad)
        assert "out of range" in str(exc.value)
        assert exc.value.line == 5

    def test_degree_mismatch(self):
        bad = H3X6_ALIST.replace("1 1 2 2 1 1", "1 1 2 2 1 2")
        with pytest.raises(AlistParseError) as exc:
            parse_alist(bad)
        assert exc.value.line == 10

    def test_sections_must_agree(self):
        bad = H3X6_ALIST.replace("3 4\n", "2 4\n")
        with pytest.raises(AlistParseError):
            parse_alist(bad)

    def test_truncated_file(self):
        with pytest.raises(AlistParseError) as exc:
            parse_alist("6 3\n2 3\n1 1 2 2 1 1\n")
        assert exc.value.line == 4

    def test_roundtrip_through_writer(self, code48):
        again = parse_alist(write_alist(code48))
        assert np.array_equal(again.to_dense(), code48.to_dense())


class TestEdgeNumbering:
    def test_row_major_ordering(self, h3x6):
        expected = [(0, 0), (0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (2, 4), (2, 5)]
        assert [tuple(e) for e in h3x6.edges] == expected

    def test_edge_count_matches_degree_sums(self, code204):
        assert code204.row_deg.sum() == code204.e
        assert code204.col_deg.sum() == code204.e

    def test_adjacency_is_symmetric(self, code48):
        for i, r in enumerate(code48.rows):
            for j in r:
                assert i in code48.cols[j]


class TestNullspace:
    def test_repetition(self, rep2):
        basis = gf2_nullspace(rep2)
        assert basis.k == 1
        assert np.array_equal(basis.basis, [[1, 1]])

    def test_appendix_by_enumeration(self, h3x6):
        basis = gf2_nullspace(h3x6)
        assert basis.k == 3
        # oracle: enumerate all 2^6 vectors
        dense = h3x6.to_dense(np.int64)
        words = {
            tuple((np.array(list(np.binary_repr(v, 6)), dtype=int)))
            for v in range(64)
            if not np.any(dense @ np.array(list(np.binary_repr(v, 6)), dtype=int) % 2)
        }
        assert len(words) == 8
        spanned = set()
        for c in range(2 ** basis.k):
            coeffs = np.array(list(np.binary_repr(c, basis.k)), dtype=np.uint8)
            spanned.add(tuple((coeffs @ basis.basis) % 2))
        assert spanned == words

    def test_identity_has_trivial_nullspace(self):
        H = ParityCheckMatrix.from_dense(np.eye(4, dtype=int))
        assert gf2_nullspace(H).k == 0

    def test_rank_plus_nullity(self, code204):
        assert gf2_rank(code204) + gf2_nullspace(code204).k == code204.n


class TestRandomCodeword:
    def test_trivial_code_gives_all_ones(self):
        H = ParityCheckMatrix.from_dense(np.eye(3, dtype=int))
        basis = gf2_nullspace(H)
        word = random_codeword(basis, np.random.default_rng(0))
        assert np.array_equal(word, np.ones(3))

    def test_repetition_frequencies(self, rep2):
        basis = gf2_nullspace(rep2)
        rng = np.random.default_rng(7)
        hits = sum(
            random_codeword(basis, rng)[0] > 0 for _ in range(10_000)
        )
        # chi-square 99% bound for a fair coin over 10^4 draws
        assert abs(hits - 5000) < 130

    def test_codewords_always_check(self, code204):
        basis = gf2_nullspace(code204)
        rng = np.random.default_rng(3)
        for _ in range(200):
            assert check_parity(random_codeword(basis, rng), code204)

    def test_ten_thousand_draws_all_check(self, code48):
        basis = gf2_nullspace(code48)
        rng = np.random.default_rng(13)
        assert all(
            check_parity(random_codeword(basis, rng), code48)
            for _ in range(10_000)
        )


class TestParityAndDecision:
    def test_all_ones_word(self, code48):
        assert check_parity(np.ones(code48.n), code48)

    def test_repetition_words(self, rep2):
        assert check_parity(np.array([-1.0, -1.0]), rep2)
        assert not check_parity(np.array([1.0, -1.0]), rep2)

    def test_length_mismatch(self, rep2):
        with pytest.raises(ValueError):
            check_parity(np.ones(3), rep2)

    def test_sign_decision(self):
        assert np.array_equal(sign_decision([0.9642, 0.9901]), [1.0, 1.0])
        assert np.array_equal(sign_decision([-0.3, 2.0]), [-1.0, 1.0])
        assert np.array_equal(sign_decision([0.0, -0.5]), [1.0, -1.0])

    def test_bipolar_roundtrip(self):
        bits = np.array([0, 1, 1, 0], dtype=np.uint8)
        assert np.array_equal(bits_to_bipolar(bits), [1.0, -1.0, -1.0, 1.0])
        assert np.array_equal(bipolar_to_bits(bits_to_bipolar(bits)), bits)
