"""Mesh builders, the fundamental piece, welding, and graph gluing."""

import numpy as np
import pytest

from steklov.build import (
    FundamentalPiece,
    MeshAssembly,
    build_disk,
    build_flat_cylinder,
    build_flat_sheet,
    build_fundamental_piece,
    cylinder_grid,
    double_piece,
    genus_formula,
    glue_from_pairing,
    glue_surface,
    pairing_from_edges,
)
from steklov.errors import (
    DegreeMismatch,
    InvalidParams,
    MeshInvariantViolated,
    NonIntegerResult,
    NotConnected,
)
from steklov.graphs import build_regular_graph, circulant_graph, complete_graph, cycle_graph
from steklov.mesh import euler_genus, mesh_from_text, mesh_to_text, validate_mesh


class TestFlatCylinder:
    def test_metric_is_exact(self):
        n_b, layers = 10, 4
        m = build_flat_cylinder(n_b, layers, circumference=1.0, length=1.0)
        grid = cylinder_grid(n_b, layers)
        for j in range(layers + 1):
            for i in range(n_b):
                u, v = int(grid[j, i]), int(grid[j, (i + 1) % n_b])
                assert m.length(u, v) == 1.0 / n_b  # bit-exact
        for j in range(layers):
            for i in range(n_b):
                assert m.length(int(grid[j, i]), int(grid[j + 1, i])) == 1.0 / layers

    def test_loops_and_topology(self):
        m = build_flat_cylinder(8, 3, circumference=2.0, length=0.5)
        assert set(m.loop_labels()) == {"bottom", "top"}
        assert m.loop_length("bottom") == pytest.approx(2.0, abs=1e-15)
        assert euler_genus(m) == (0, 2, 0)
        assert validate_mesh(m) == []

    def test_bottom_is_ring_zero(self):
        n_b, layers = 6, 2
        m = build_flat_cylinder(n_b, layers)
        grid = cylinder_grid(n_b, layers)
        assert set(m.loop("bottom").vertices) == set(int(v) for v in grid[0])
        assert set(m.loop("top").vertices) == set(int(v) for v in grid[layers])

    def test_area(self):
        m = build_flat_cylinder(16, 8, circumference=3.0, length=0.5)
        assert m.total_area() == pytest.approx(1.5, rel=1e-12)

    def test_min_size(self):
        with pytest.raises(InvalidParams):
            build_flat_cylinder(2, 2)


class TestDiskAndSheet:
    def test_disk_shape(self):
        m = build_disk(6, 24, radius=1.0)
        assert euler_genus(m) == (1, 1, 0)
        assert len(m.loop("rim")) == 24
        # polygonal approximation from below
        assert m.total_area() == pytest.approx(np.pi, rel=0.02)

    def test_disk_radius_scales(self):
        a = build_disk(4, 16, radius=1.0).total_area()
        b = build_disk(4, 16, radius=2.0).total_area()
        assert b == pytest.approx(4 * a, rel=1e-12)

    def test_sheet(self):
        m = build_flat_sheet(5, 3, width=2.0, height=1.0)
        assert euler_genus(m) == (1, 1, 0)
        assert m.total_area() == pytest.approx(2.0, rel=1e-12)
        assert validate_mesh(m) == []


class TestFundamentalPiece:
    @pytest.mark.parametrize("k,n_b,resolution", [(2, 8, 1), (3, 8, 2), (4, 10, 2)])
    def test_invariants(self, k, n_b, resolution):
        piece = build_fundamental_piece(k, n_b, resolution)
        m = piece.mesh
        assert validate_mesh(m) == []
        assert euler_genus(m) == (1 - k, k + 1, 0)
        assert piece.loop_labels == ("sigma0",) + tuple(f"B{j}" for j in range(1, k + 1))
        for label in piece.loop_labels:
            assert len(m.loop(label)) == n_b
            assert m.loop_length(label) == pytest.approx(1.0, abs=1e-9)
        assert piece.collar_vertices.shape == (resolution + 1, n_b)

    def test_collar_grid_is_the_sigma_tube(self):
        piece = build_fundamental_piece(4, 8, 2)
        grid = piece.collar_vertices
        assert set(piece.mesh.loop("sigma0").vertices) == set(int(v) for v in grid[0])
        lo, hi = piece.slot_tri_slices["sigma0"]
        tube_vertices = set(piece.mesh.triangles[lo:hi].reshape(-1).tolist())
        assert tube_vertices == set(int(v) for v in grid.reshape(-1))

    def test_tube_slices_partition(self):
        piece = build_fundamental_piece(3, 8, 2)
        slices = sorted(piece.slot_tri_slices.values())
        for (a_lo, a_hi), (b_lo, b_hi) in zip(slices, slices[1:]):
            assert a_hi == b_lo
        assert slices[-1][1] == len(piece.mesh.triangles)

    def test_parameter_validation(self):
        with pytest.raises(InvalidParams):
            build_fundamental_piece(1, 8, 1)
        with pytest.raises(InvalidParams):
            build_fundamental_piece(4, 6, 1)
        with pytest.raises(InvalidParams):
            build_fundamental_piece(4, 9, 1)  # odd n_b
        with pytest.raises(InvalidParams):
            build_fundamental_piece(4, 8, 0)


class TestAssembly:
    def test_weld_size_mismatch(self):
        asm = MeshAssembly()
        asm.add(build_flat_cylinder(8, 2), prefix="a.")
        asm.add(build_flat_cylinder(6, 2), prefix="b.")
        with pytest.raises(MeshInvariantViolated):
            asm.weld("a.top", "b.bottom")

    def test_weld_unknown_loop(self):
        asm = MeshAssembly()
        asm.add(build_flat_cylinder(8, 2), prefix="a.")
        with pytest.raises(InvalidParams):
            asm.weld("a.top", "a.nope")

    def test_seam_length_mismatch(self):
        asm = MeshAssembly()
        asm.add(build_flat_cylinder(8, 2, circumference=1.0), prefix="a.")
        asm.add(build_flat_cylinder(8, 2, circumference=2.0), prefix="b.")
        asm.weld("a.top", "b.bottom")
        with pytest.raises(MeshInvariantViolated):
            asm.finalize()

    def test_two_cylinders_weld_into_one(self):
        asm = MeshAssembly()
        asm.add(build_flat_cylinder(8, 2), prefix="a.")
        asm.add(build_flat_cylinder(8, 3), prefix="b.")
        asm.weld("a.top", "b.bottom")
        m, relabel = asm.finalize()
        assert m.n_vertices == 8 * 3 + 8 * 4 - 8
        assert euler_genus(m) == (0, 2, 0)
        assert validate_mesh(m) == []
        assert relabel.shape == (8 * 3 + 8 * 4,)

    def test_duplicate_label_rejected(self):
        asm = MeshAssembly()
        asm.add(build_flat_cylinder(8, 2))
        with pytest.raises(InvalidParams):
            asm.add(build_flat_cylinder(8, 2))


class TestPairing:
    def test_slots_by_ascending_neighbor(self):
        pairs = pairing_from_edges(3, 2, [(0, 1), (0, 2), (1, 2)], ("B1", "B2"))
        assert pairs == (
            ((0, "B1"), (1, "B1")),
            ((0, "B2"), (2, "B1")),
            ((1, "B2"), (2, "B2")),
        )

    def test_multigraph_edges_accepted(self):
        pairs = pairing_from_edges(2, 4, [(0, 1)] * 4, ("B1", "B2", "B3", "B4"))
        assert len(pairs) == 4
        assert {s for (_, s), _ in pairs} == {"B1", "B2", "B3", "B4"}

    def test_self_loop_rejected(self):
        with pytest.raises(InvalidParams):
            pairing_from_edges(2, 2, [(0, 0), (0, 1)], ("B1", "B2"))

    def test_degree_mismatch(self):
        with pytest.raises(DegreeMismatch):
            pairing_from_edges(3, 2, [(0, 1), (0, 2)], ("B1", "B2"))


class TestGlue:
    def test_chain_of_four_k2_pieces(self):
        # hand-checkable case: a 2-regular cycle of four copies is a
        # torus with 4 punctures: b = 4, genus = 1
        piece = build_fundamental_piece(2, 8, 1)
        surface = glue_surface(piece, cycle_graph(4))
        chi, b, genus = euler_genus(surface.mesh)
        assert (b, genus) == (4, 1)
        assert genus == genus_formula(0, 2, 4)

    def test_k5_glue(self, piece_small):
        g = complete_graph(5)
        surface = glue_surface(piece_small, g)
        n_piece = piece_small.mesh.n_vertices
        assert surface.mesh.n_vertices == 5 * n_piece - g.n_edges * piece_small.n_b
        assert euler_genus(surface.mesh)[2] == genus_formula(0, 4, 5) == 6
        assert validate_mesh(surface.mesh) == []
        assert surface.sigma_loops == tuple(f"p{v}.sigma0" for v in range(5))

    def test_collar_maps_match_loops(self, piece_small):
        surface = glue_surface(piece_small, complete_graph(5))
        for v, label in enumerate(surface.sigma_loops):
            ring0 = set(int(x) for x in surface.collar_maps[v][0])
            assert ring0 == set(surface.mesh.loop(label).vertices)

    def test_twist_preserves_topology(self, piece_small):
        g = circulant_graph(6, (1, 2))
        plain = glue_surface(piece_small, g)
        twisted = glue_surface(piece_small, g, twist=3)
        assert euler_genus(twisted.mesh) == euler_genus(plain.mesh)
        assert validate_mesh(twisted.mesh) == []

    def test_degree_mismatch_rejected(self, piece_small):
        with pytest.raises(DegreeMismatch):
            glue_surface(piece_small, cycle_graph(4))

    def test_disconnected_pattern_rejected(self, piece_small):
        g = build_regular_graph(
            10, 4,
            [(i, (i + 1) % 5) for i in range(5)] + [(i, (i + 2) % 5) for i in range(5)]
            + [(5 + i, 5 + (i + 1) % 5) for i in range(5)]
            + [(5 + i, 5 + (i + 2) % 5) for i in range(5)],
        )
        with pytest.raises(NotConnected):
            glue_surface(piece_small, g)

    def test_doubled_piece(self, piece_small):
        surface = double_piece(piece_small)
        assert euler_genus(surface.mesh) == (-6, 8, 0)
        assert validate_mesh(surface.mesh) == []

    def test_multigraph_pairing_glues(self, piece_small):
        # two copies joined along all four slots: genus formula with N=2
        pairs = pairing_from_edges(2, 4, [(0, 1)] * 4, piece_small.b_loops)
        surface = glue_from_pairing(piece_small, 2, pairs)
        assert euler_genus(surface.mesh)[2] == genus_formula(0, 4, 2) == 3

    def test_pairing_slot_reuse_rejected(self, piece_small):
        pairs = (((0, "B1"), (1, "B1")), ((0, "B1"), (1, "B2")))
        with pytest.raises(InvalidParams):
            glue_from_pairing(piece_small, 2, pairs)

    def test_piece_round_trip_through_file_format(self, piece_small):
        restored = FundamentalPiece.from_mesh(mesh_from_text(mesh_to_text(piece_small.mesh)))
        assert restored.k == piece_small.k
        assert restored.n_b == piece_small.n_b
        assert restored.b_loops == piece_small.b_loops
        a = glue_surface(restored, complete_graph(5))
        b = glue_surface(piece_small, complete_graph(5))
        assert a.mesh.content_id() == b.mesh.content_id()


class TestGenusFormula:
    @pytest.mark.parametrize("n", [4, 8, 12, 16, 24, 32])
    def test_k4_values(self, n):
        assert genus_formula(0, 4, n) == 1 + n

    def test_other_degrees(self):
        assert genus_formula(0, 2, 4) == 1
        assert genus_formula(0, 3, 2) == 2
        assert genus_formula(1, 2, 3) == 4

    def test_non_integer_rejected(self):
        with pytest.raises(NonIntegerResult):
            genus_formula(0, 3, 3)
