import numpy as np
import pytest

from dynfeat.classify import ModelSpec
from dynfeat.errors import ArgumentError, FormatError
from dynfeat.features import (
    FeatureConfig,
    FeatureMatrix,
    attribute_groups,
    bio_default_config,
    export_csv,
    extract_features,
    extract_fixed_vertex_features,
    feature_columns,
    fit_standardizer,
    greedy_forward_selection,
    import_csv,
    parse_config,
    social_default_config,
)
from dynfeat.graphs import Dataset, from_edge_list, generate_topology, relabel

from conftest import clique, path_graph, random_graph, triangle


def one_graph_dataset(g, label=0, universe=()):
    return Dataset(name="one", graphs=(g,), class_labels=np.array([label]),
                   label_universe=universe)


class TestFeatureConfig:
    def test_unknown_attribute(self):
        with pytest.raises(ArgumentError):
            FeatureConfig(attributes=("pagerank",))

    def test_empty_config_rejected(self):
        with pytest.raises(ArgumentError):
            FeatureConfig(attributes=(), include_globals=False)

    def test_attribute_order_canonical(self):
        cfg = FeatureConfig(attributes=("clustering", "degree"))
        assert cfg.attributes == ("degree", "clustering")

    def test_parse_roundtrip(self, tmp_path):
        p = tmp_path / "cfg.txt"
        p.write_text(
            "attributes = degree, identity_partition\n"
            "ts = 0,1,2\n"
            "include_globals = false\n"
            "use_weights = true\n"
            "selection = all\n"
            "# comment line\n")
        cfg = parse_config(p)
        assert cfg.attributes == ("degree", "identity_partition")
        assert cfg.ts == (0, 1, 2)
        assert not cfg.include_globals

    def test_parse_rejects_unknown_key(self, tmp_path):
        p = tmp_path / "cfg.txt"
        p.write_text("colour = blue\n")
        with pytest.raises(FormatError):
            parse_config(p)

    def test_default_configs(self):
        assert "node_labels" in bio_default_config().attributes
        assert "betweenness" in social_default_config().attributes


class TestExtract:
    def test_identity_partition_on_clique4(self):
        cfg = FeatureConfig(attributes=("identity_partition",), ts=(0,),
                            include_globals=False)
        fm = extract_features(one_graph_dataset(clique(4)), cfg)
        assert fm.column_names == ("id@0",)
        assert fm.values[0, 0] == pytest.approx(0.75, abs=1e-15)

    def test_regular_graph_degree_covariance_is_zero(self):
        cfg = FeatureConfig(attributes=("degree",), ts=(0, 1), include_globals=True)
        fm = extract_features(one_graph_dataset(triangle()), cfg)
        assert fm.column_names == ("deg@0", "deg@1", "num_nodes", "num_edges")
        assert fm.values[0].tolist() == pytest.approx([0.0, 0.0, 3.0, 3.0], abs=1e-14)

    def test_column_arithmetic(self):
        ds = Dataset(name="two", graphs=(triangle(), path_graph(4)),
                     class_labels=np.array([0, 1]))
        cfg = FeatureConfig(
            attributes=("degree", "second_eigenvector", "clustering",
                        "betweenness", "triangles", "identity_partition"))
        fm = extract_features(ds, cfg)
        assert fm.values.shape == (2, 6 * 4 + 2)
        assert np.all(np.isfinite(fm.values))

    def test_labels_requested_but_absent(self):
        cfg = FeatureConfig(attributes=("node_labels",))
        with pytest.raises(ArgumentError, match="node labels"):
            extract_features(one_graph_dataset(triangle()), cfg)

    def test_label_features_use_global_universe(self):
        g1 = from_edge_list(3, [(0, 1, 1.0), (1, 2, 1.0)], node_labels=[0, 0, 0])
        g2 = from_edge_list(3, [(0, 1, 1.0), (1, 2, 1.0)], node_labels=[1, 0, 1])
        ds = Dataset(name="lab", graphs=(g1, g2), class_labels=np.array([0, 1]),
                     label_universe=(0, 1))
        cfg = FeatureConfig(attributes=("node_labels",), ts=(0, 1), include_globals=False)
        fm = extract_features(ds, cfg)
        # single-category graph: indicator column is constant -> zero covariance
        assert fm.values[0] == pytest.approx([0.0, 0.0], abs=1e-14)
        assert np.any(fm.values[1] != 0)

    def test_degenerate_eigen_flagged(self):
        cfg = FeatureConfig(attributes=("second_eigenvector",), ts=(0, 1),
                            include_globals=False)
        fm = extract_features(one_graph_dataset(clique(4)), cfg)
        assert fm.degenerate_flags[0] == {"eig2@0", "eig2@1"}

    def test_eigen_convergence_fallback_is_zero(self):
        g = from_edge_list(4, [(0, 1, 1.0), (2, 3, 1.0)])  # disconnected bipartite
        cfg = FeatureConfig(attributes=("second_eigenvector",), ts=(0, 1),
                            include_globals=False)
        fm = extract_features(one_graph_dataset(g), cfg)
        assert fm.values[0].tolist() == [0.0, 0.0]
        assert fm.degenerate_flags[0] == {"eig2@0", "eig2@1"}

    def test_use_weights_toggle(self):
        g = from_edge_list(3, [(0, 1, 5.0), (1, 2, 3.0)])
        cfg_w = FeatureConfig(attributes=("degree",), ts=(0, 1), include_globals=False)
        cfg_u = FeatureConfig(attributes=("degree",), ts=(0, 1), include_globals=False,
                              use_weights=False)
        fm_w = extract_features(one_graph_dataset(g), cfg_w)
        fm_u = extract_features(one_graph_dataset(g), cfg_u)
        from dynfeat.graphs import binarize
        fm_b = extract_features(one_graph_dataset(binarize(g)), cfg_w)
        assert fm_u.values.tolist() == fm_b.values.tolist()
        assert fm_u.values.tolist() != fm_w.values.tolist()

    def test_permutation_invariance_of_rows(self):
        rng = np.random.default_rng(0)
        g = random_graph(rng, 12, 0.4, weighted=True)
        cfg = FeatureConfig(
            attributes=("degree", "second_eigenvector", "clustering",
                        "betweenness", "triangles", "identity_partition"))
        perm = rng.permutation(g.n)
        fm = extract_features(one_graph_dataset(g), cfg)
        fmp = extract_features(one_graph_dataset(relabel(g, perm)), cfg)
        flagged = fm.degenerate_flags[0] | fmp.degenerate_flags[0]
        for j, name in enumerate(fm.column_names):
            if name in flagged:
                continue
            assert fmp.values[0, j] == pytest.approx(fm.values[0, j], abs=1e-10), name

    def test_parallel_extraction_matches_serial(self):
        rng = np.random.default_rng(1)
        graphs = tuple(random_graph(rng, 10, 0.5) for _ in range(6))
        ds = Dataset(name="par", graphs=graphs, class_labels=np.zeros(6, dtype=int))
        cfg = FeatureConfig(attributes=("degree", "clustering", "identity_partition"))
        serial = extract_features(ds, cfg, jobs=1)
        parallel = extract_features(ds, cfg, jobs=2)
        assert serial.values.tolist() == parallel.values.tolist()


class TestFixedVertexMode:
    def _dataset(self, n=6, graphs=3):
        rng = np.random.default_rng(2)
        gs = tuple(random_graph(rng, n, 0.5, weighted=True) for _ in range(graphs))
        return Dataset(name="fv", graphs=gs, class_labels=np.zeros(graphs, dtype=int))

    def test_column_count(self):
        ds = self._dataset()
        cfg = FeatureConfig(attributes=("degree",), ts=(0, 1, 2, 3))
        fm = extract_fixed_vertex_features(ds, cfg)
        assert len(fm.column_names) == 4 + 6 * 4 + 2
        assert "v0@0" in fm.column_names and "v5@3" in fm.column_names

    def test_84_nodes_4_times_gives_336(self):
        rng = np.random.default_rng(3)
        gs = tuple(random_graph(rng, 84, 0.1) for _ in range(2))
        ds = Dataset(name="fv84", graphs=gs, class_labels=np.array([0, 1]))
        cfg = FeatureConfig(attributes=(), include_globals=False, fixed_vertex_mode=True)
        fm = extract_features(ds, cfg)
        assert len(fm.column_names) == 336

    def test_unequal_sizes_rejected(self):
        ds = Dataset(name="bad", graphs=(triangle(), path_graph(4)),
                     class_labels=np.array([0, 1]))
        cfg = FeatureConfig(attributes=("degree",))
        with pytest.raises(ArgumentError, match="share a vertex count"):
            extract_fixed_vertex_features(ds, cfg)

    def test_isolated_vertex_feature_finite(self):
        g = from_edge_list(4, [(0, 1, 1.0), (1, 2, 1.0)])  # vertex 3 isolated
        ds = one_graph_dataset(g)
        cfg = FeatureConfig(attributes=(), include_globals=False, fixed_vertex_mode=True)
        fm = extract_features(ds, cfg)
        assert np.all(np.isfinite(fm.values))


class TestStandardizer:
    def _matrix(self, values):
        values = np.asarray(values, dtype=np.float64)
        return FeatureMatrix(
            column_names=tuple(f"c{i}" for i in range(values.shape[1])),
            values=values,
            graph_ids=tuple(f"g{i}" for i in range(len(values))),
            class_labels=np.zeros(len(values), dtype=np.int64))

    def test_population_std(self):
        fm = self._matrix([[1.0], [2.0], [3.0]])
        out = fit_standardizer(fm, [0, 1, 2])
        expected = (np.array([1.0, 2.0, 3.0]) - 2.0) / np.sqrt(2.0 / 3.0)
        assert out.values[:, 0] == pytest.approx(expected)
        assert out.values[0, 0] == pytest.approx(-1.224744871391589)

    def test_constant_column_unchanged(self):
        fm = self._matrix([[5.0], [5.0], [5.0]])
        out = fit_standardizer(fm, [0, 1, 2])
        assert out.values[:, 0].tolist() == [5.0, 5.0, 5.0]

    def test_test_rows_use_train_statistics(self):
        fm = self._matrix([[0.0], [2.0], [100.0]])
        out = fit_standardizer(fm, [0, 1])  # mean 1, std 1
        assert out.values[:, 0].tolist() == [-1.0, 1.0, 99.0]

    def test_changing_test_row_does_not_move_statistics(self):
        base = self._matrix([[0.0], [2.0], [7.0]])
        bumped = self._matrix([[0.0], [2.0], [700.0]])
        a = fit_standardizer(base, [0, 1])
        b = fit_standardizer(bumped, [0, 1])
        assert a.standardization[0].tolist() == b.standardization[0].tolist()
        assert a.standardization[1].tolist() == b.standardization[1].tolist()

    def test_empty_train_rejected(self):
        with pytest.raises(ArgumentError):
            fit_standardizer(self._matrix([[1.0]]), [])


class TestGreedySelection:
    def _signal_matrix(self, seed=0):
        rng = np.random.default_rng(seed)
        n = 80
        labels = np.repeat([0, 1], n // 2)
        signal = labels[:, None] * 2.0 + rng.standard_normal((n, 2)) * 0.1
        noise = rng.standard_normal((n, 4))
        values = np.hstack([noise[:, :2], signal, noise[:, 2:]])
        fm = FeatureMatrix(
            column_names=("deg@0", "deg@1", "id@0", "id@1", "num_nodes", "num_edges"),
            values=values,
            graph_ids=tuple(f"g{i}" for i in range(n)),
            class_labels=labels)
        return fm, labels

    def test_selects_planted_signal_group(self):
        fm, labels = self._signal_matrix()
        spec = ModelSpec(kind="linear_svm", C_grid=(1.0,))
        chosen = greedy_forward_selection(fm, labels, spec, folds=4, seed=0)
        assert chosen[0] == "id"
        assert "deg" not in chosen

    def test_single_group_returned(self):
        fm, labels = self._signal_matrix()
        sub = fm.select_columns(["id@0", "id@1"])
        spec = ModelSpec(kind="linear_svm", C_grid=(1.0,))
        assert greedy_forward_selection(sub, labels, spec, folds=4, seed=0) == ("id",)

    def test_tie_prefers_earlier_group(self):
        rng = np.random.default_rng(1)
        n = 40
        labels = np.repeat([0, 1], n // 2)
        col = labels.astype(float) * 4.0 + rng.standard_normal(n) * 0.01
        values = np.column_stack([col, col])  # identical signal in both groups
        fm = FeatureMatrix(column_names=("deg@0", "id@0"), values=values,
                           graph_ids=tuple(map(str, range(n))), class_labels=labels)
        spec = ModelSpec(kind="linear_svm", C_grid=(1.0,))
        chosen = greedy_forward_selection(fm, labels, spec, folds=4, seed=0)
        assert chosen[0] == "deg"

    def test_grouping(self):
        groups = attribute_groups(("deg@0", "deg@1", "v0@0", "v1@0",
                                   "num_nodes", "num_edges", "lab@2"))
        assert groups["deg"] == ["deg@0", "deg@1"]
        assert groups["vertex"] == ["v0@0", "v1@0"]
        assert groups["globals"] == ["num_nodes", "num_edges"]
        assert groups["lab"] == ["lab@2"]


class TestCsvRoundTrip:
    def test_exact_roundtrip(self, tmp_path):
        rng = np.random.default_rng(4)
        fm = FeatureMatrix(
            column_names=("a@0", "a@1", "num_nodes"),
            values=rng.standard_normal((5, 3)) * 1e3,
            graph_ids=tuple(f"g{i}" for i in range(5)),
            class_labels=np.array([0, 1, 0, 1, 1]))
        path = tmp_path / "fm.csv"
        export_csv(fm, path)
        back = import_csv(path)
        assert back.column_names == fm.column_names
        assert back.graph_ids == fm.graph_ids
        assert back.class_labels.tolist() == fm.class_labels.tolist()
        assert np.array_equal(back.values, fm.values)  # bit-exact

    def test_line_count(self, tmp_path):
        fm = FeatureMatrix(column_names=("x",), values=np.zeros((7, 1)),
                           graph_ids=tuple(map(str, range(7))),
                           class_labels=np.zeros(7, dtype=np.int64))
        path = tmp_path / "fm.csv"
        export_csv(fm, path)
        assert len(path.read_text().splitlines()) == 8

    def test_empty_matrix_header_only(self, tmp_path):
        fm = FeatureMatrix(column_names=("x", "y"), values=np.zeros((0, 2)),
                           graph_ids=(), class_labels=np.zeros(0, dtype=np.int64))
        path = tmp_path / "fm.csv"
        export_csv(fm, path)
        assert path.read_text() == "graph_id,class,x,y\n"

    def test_malformed_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("graph_id,class,x\ng0,0\n")
        with pytest.raises(FormatError):
            import_csv(path)

    def test_extraction_deterministic(self, tmp_path):
        ds = Dataset(name="det", graphs=(generate_topology("communities3", 12),
                                         generate_topology("ring", 8)),
                     class_labels=np.array([0, 1]))
        cfg = FeatureConfig(attributes=("degree", "second_eigenvector",
                                        "identity_partition"))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        export_csv(extract_features(ds, cfg), a)
        export_csv(extract_features(ds, cfg), b)
        assert a.read_bytes() == b.read_bytes()
