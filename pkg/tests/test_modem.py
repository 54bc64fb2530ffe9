import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from pydantic import ValidationError

from src.core.errors import DimensionError
from src.models import MappingPlan, block_grid
from src.modem import (
    Constellation,
    ModuleMatrix,
    ThetaFrame,
    apply_block_reduction,
    bits_to_indices,
    bits_to_symbols,
    block_expander,
    element_blocks,
    frame_to_modules,
    frames_to_slot_indices,
    gray_decode,
    gray_encode,
    modules_to_frame,
    obstruction_mask,
    symbols_to_bits,
)


def random_modules(side, seed=0):
    return ModuleMatrix(np.random.default_rng(seed).integers(0, 2, size=(side, side)))


class TestConstellation:
    @pytest.mark.parametrize("m", [2, 4, 8, 16, 32])
    def test_unit_circle_and_gray_neighbours(self, m):
        c = Constellation(m)
        assert_allclose(np.abs(c.points), 1.0)
        for i in range(m):
            assert int(c.bit_distance(i, (i + 1) % m)) == 1

    @pytest.mark.parametrize("m", [2, 4, 8, 16])
    def test_label_inverse(self, m):
        c = Constellation(m)
        assert_array_equal(c.labels[c.label_to_index], np.arange(m))
        assert_array_equal(gray_decode(gray_encode(np.arange(m))), np.arange(m))

    def test_qpsk_labels(self):
        c = Constellation(4)
        idx = bits_to_indices([0, 0, 0, 1, 1, 1, 1, 0], c)
        assert_array_equal(idx, [0, 1, 2, 3])
        assert_allclose(bits_to_symbols([1, 1], c), [-1.0 + 0j], atol=1e-12)

    def test_bits_round_trip(self):
        c = Constellation(16)
        bits = np.random.default_rng(3).integers(0, 2, size=64)
        assert_array_equal(symbols_to_bits(bits_to_indices(bits, c), c), bits)

    def test_nearest_ties_go_to_lowest_index(self):
        c = Constellation(4)
        assert int(c.nearest(0.0)) == 0
        assert int(c.nearest(np.exp(1j * np.pi / 4))) == 0
        assert int(c.nearest(np.exp(1j * 3 * np.pi / 4))) == 1

    def test_nearest_matches_sector_off_boundaries(self):
        c = Constellation(8)
        y = np.random.default_rng(5).standard_normal(500) + 1j * np.random.default_rng(6).standard_normal(500)
        assert_array_equal(c.nearest(y), c.sector(y))

    def test_rejects_bad_order_and_bits(self):
        with pytest.raises(ValueError):
            Constellation(6)
        with pytest.raises(DimensionError):
            bits_to_indices([1, 0, 1], Constellation(4))
        with pytest.raises(ValueError):
            bits_to_indices([2, 0], Constellation(4))


class TestModuleMatrix:
    def test_pbm_round_trip_with_comment(self):
        m = random_modules(21)
        text = m.to_pbm("version 1")
        assert text.startswith("P1\n# version 1\n21 21\n")
        assert ModuleMatrix.from_pbm(text).equals(m)

    def test_save_and_load(self, tmp_path):
        m = random_modules(9, seed=2)
        path = m.save(tmp_path / "sub" / "grid.pbm")
        assert ModuleMatrix.load(path).equals(m)

    def test_differences(self):
        a = ModuleMatrix.zeros(4)
        cells = np.zeros((4, 4), dtype=np.uint8)
        cells[1, 2] = cells[3, 3] = 1
        assert a.differences(ModuleMatrix(cells)) == 2

    def test_rejects_bad_input(self):
        with pytest.raises(DimensionError):
            ModuleMatrix(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            ModuleMatrix(np.full((2, 2), 2))
        with pytest.raises(ValueError):
            ModuleMatrix.from_pbm("P1\n2 2\n0 1 1\n")


class TestBlocks:
    @pytest.mark.parametrize(
        "side,count,expected",
        [(38, 38, (19, 2)), (19, 19, (19, 1)), (4, 2, (2, 1)), (4, 4, (2, 2)), (5, 4, None)],
    )
    def test_block_grid(self, side, count, expected):
        assert block_grid(side, count) == expected

    def test_element_blocks_square_tiling(self):
        assert_array_equal(element_blocks(16, 4), [0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 3, 3, 2, 2, 3, 3])
        assert_array_equal(element_blocks(12), np.arange(12))

    def test_expander_rows_and_columns(self):
        b = block_expander(36, 9)
        assert b.shape == (36, 9)
        assert_array_equal(b.sum(axis=1), np.ones(36))
        assert_array_equal(b.sum(axis=0), np.full(9, 4))
        assert_array_equal(block_expander(5), np.eye(5))

    def test_untileable_blocks(self):
        with pytest.raises(DimensionError):
            element_blocks(25, 4)
        with pytest.raises(ValidationError):
            MappingPlan(elements=25, module_side=2, block_count=4)


class TestMapping:
    def test_single_frame_round_trip(self):
        plan = MappingPlan(elements=441, bits_per_symbol=1, module_side=21)
        c = Constellation(2)
        m = random_modules(21)
        frames = modules_to_frame(m, plan, c)
        assert len(frames) == 1
        assert_allclose(frames[0].theta, np.where(m.flat() == 1, -1.0, 1.0), atol=1e-12)
        assert frame_to_modules(frames_to_slot_indices(frames), plan, c).equals(m)

    def test_multi_frame_zero_padding(self):
        plan = MappingPlan(elements=16, bits_per_symbol=1, module_side=5)
        c = Constellation(2)
        m = random_modules(5, seed=8)
        frames = modules_to_frame(m, plan, c)
        assert plan.frame_count == 2 and len(frames) == 2
        assert_array_equal(frames[1].indices[9:], np.zeros(7))
        assert frame_to_modules(frames_to_slot_indices(frames), plan, c).equals(m)

    def test_sixteen_psk_run_length(self):
        plan = MappingPlan(elements=361, bits_per_symbol=4, module_side=21)
        c = Constellation(16)
        m = random_modules(21, seed=4)
        frames = modules_to_frame(m, plan, c)
        assert len(frames) == 1
        assert_array_equal(c.label_bits(frames[0].indices[0]), m.flat()[:4])
        assert frame_to_modules(frames_to_slot_indices(frames), plan, c).equals(m)

    def test_square_sub_blocks(self):
        plan = MappingPlan(elements=16, bits_per_symbol=4, module_side=8)
        c = Constellation(16)
        m = random_modules(8, seed=6)
        frames = modules_to_frame(m, plan, c)
        assert len(frames) == 1
        first = m.cells[0:2, 0:2].ravel()
        assert_array_equal(c.label_bits(frames[0].indices[0]), first)
        last = m.cells[6:8, 6:8].ravel()
        assert_array_equal(c.label_bits(frames[0].indices[15]), last)
        assert frame_to_modules(frames_to_slot_indices(frames), plan, c).equals(m)

    def test_block_reduction_repeats_block_symbol(self):
        plan = MappingPlan(elements=16, bits_per_symbol=1, module_side=2, block_count=4)
        c = Constellation(2)
        cells = np.array([[1, 0], [0, 1]])
        frame = apply_block_reduction(ModuleMatrix(cells), plan, c)
        assert_array_equal(frame.indices, [1, 0, 0, 1])
        assert_allclose(frame.theta, c.points[frame.indices][element_blocks(16, 4)])

    def test_block_reduction_geometry_mismatch(self):
        c = Constellation(2)
        with pytest.raises(DimensionError):
            apply_block_reduction(ModuleMatrix.zeros(3), MappingPlan(elements=16, module_side=3, block_count=4), c)
        with pytest.raises(DimensionError):
            apply_block_reduction(ModuleMatrix.zeros(4), MappingPlan(elements=16, module_side=4), c)

    def test_shape_and_order_checks(self):
        plan = MappingPlan(elements=16, bits_per_symbol=1, module_side=4)
        with pytest.raises(DimensionError):
            modules_to_frame(ModuleMatrix.zeros(4), plan, Constellation(4))
        with pytest.raises(DimensionError):
            modules_to_frame(ModuleMatrix.zeros(5), plan, Constellation(2))
        with pytest.raises(DimensionError):
            frame_to_modules(np.zeros((2, 16)), plan, Constellation(2))
        with pytest.raises(ValueError):
            frame_to_modules(np.full((1, 16), 2), plan, Constellation(2))

    def test_theta_magnitude(self):
        with pytest.raises(ValueError):
            ThetaFrame(theta=np.array([1.5 + 0j]), indices=np.array([0]))


class TestObstruction:
    def test_bottom_right_square(self):
        mask = obstruction_mask(MappingPlan(elements=16, module_side=4, obstruction_side=2))
        assert_array_equal(np.flatnonzero(mask), [10, 11, 14, 15])

    def test_empty_and_full(self):
        assert not obstruction_mask(MappingPlan(elements=16, module_side=4)).any()
        assert obstruction_mask(MappingPlan(elements=16, module_side=4, obstruction_side=4)).all()

    def test_too_large(self):
        with pytest.raises(ValidationError):
            MappingPlan(elements=16, module_side=4, obstruction_side=5)


class TestMappingProperties:
    def test_bpsk_symbol_error_flips_one_module(self):
        plan = MappingPlan(elements=16, bits_per_symbol=1, module_side=4)
        c = Constellation(2)
        truth = np.zeros((1, 16), dtype=np.int64)
        for slot in range(16):
            decided = truth.copy()
            decided[0, slot] = 1
            assert frame_to_modules(truth, plan, c).differences(frame_to_modules(decided, plan, c)) == 1

    @pytest.mark.parametrize(
        "elements,side",
        [(16, 8), (361, 21)],
        ids=["sub_block", "run_length"],
    )
    def test_sixteen_psk_symbol_error_flips_one_to_four_modules(self, elements, side):
        plan = MappingPlan(elements=elements, bits_per_symbol=4, module_side=side)
        c = Constellation(16)
        slot = 5
        for true_idx in range(16):
            truth = np.zeros((1, elements), dtype=np.int64)
            truth[0, slot] = true_idx
            sent = frame_to_modules(truth, plan, c)
            for wrong in range(16):
                if wrong == true_idx:
                    continue
                decided = truth.copy()
                decided[0, slot] = wrong
                flipped = sent.differences(frame_to_modules(decided, plan, c))
                assert 1 <= flipped <= 4
                assert flipped == int(c.bit_distance(true_idx, wrong))

    def test_sub_block_errors_stay_inside_their_square(self):
        plan = MappingPlan(elements=16, bits_per_symbol=4, module_side=8)
        c = Constellation(16)
        truth = np.zeros((1, 16), dtype=np.int64)
        decided = truth.copy()
        decided[0, 5] = 15
        a = frame_to_modules(truth, plan, c).cells
        b = frame_to_modules(decided, plan, c).cells
        rows, cols = np.nonzero(a != b)
        assert rows.size > 0
        assert set(rows) <= {2, 3} and set(cols) <= {2, 3}

    def test_round_trip_on_random_plans(self):
        rng = np.random.default_rng(11)
        for case in range(500):
            k = int(rng.integers(1, 5))
            side = int(rng.integers(2, 11))
            elements = side * side
            block_count = None
            if rng.random() < 0.3:
                options = [b for b in range(1, elements + 1) if elements % b == 0 and block_grid(side, b) is not None]
                block_count = int(rng.choice(options))
            plan = MappingPlan(
                elements=elements,
                bits_per_symbol=k,
                module_side=int(rng.integers(1, 31)),
                block_count=block_count,
            )
            c = Constellation(2**k)
            m = ModuleMatrix(rng.integers(0, 2, size=(plan.module_side, plan.module_side)))
            frames = modules_to_frame(m, plan, c)
            assert len(frames) == plan.frame_count
            assert frame_to_modules(frames_to_slot_indices(frames), plan, c).equals(m), f"case {case}: {plan}"
