import numpy as np
import pytest

from chronograph.graph import (
    ILLICIT,
    LICIT,
    UNKNOWN,
    IntegrityError,
    ParseError,
    build_graph,
    export_csv,
    graph_slice,
    ingest,
    validate,
)
from conftest import TINY_CLASSES, TINY_EDGES, TINY_FEATURES


def test_tiny_fixture_counts(tiny_graph):
    assert tiny_graph.num_nodes == 3
    assert tiny_graph.num_edges == 1
    assert tiny_graph.num_steps == 2
    assert tiny_graph.labels.tolist() == [ILLICIT, LICIT, UNKNOWN]
    assert tiny_graph._slices[1].tolist() == [0, 1]
    assert tiny_graph._slices[2].tolist() == [2]


def test_missing_class_rows_become_unknown(tiny_graph):
    # txId 30 is absent from the classes file.
    assert tiny_graph.labels[tiny_graph.id_to_index[30]] == UNKNOWN


def test_ingest_deterministic(tiny_dataset):
    args = (tiny_dataset["features"], tiny_dataset["edges"], tiny_dataset["classes"])
    a = ingest(*args, local_count=2)
    b = ingest(*args, local_count=2)
    assert np.array_equal(a.nodes.features, b.nodes.features)
    assert np.array_equal(a.edges, b.edges)
    assert np.array_equal(a.labels, b.labels)


def test_ingest_accepts_crlf(tmp_path):
    d = tmp_path / "crlf"
    d.mkdir()
    (d / "features.csv").write_bytes(TINY_FEATURES.replace("\n", "\r\n").encode())
    (d / "edges.csv").write_bytes(TINY_EDGES.replace("\n", "\r\n").encode())
    (d / "classes.csv").write_bytes(TINY_CLASSES.replace("\n", "\r\n").encode())
    g = ingest(d / "features.csv", d / "edges.csv", d / "classes.csv", local_count=2)
    assert g.num_nodes == 3 and g.num_edges == 1


def test_edge_referencing_unknown_txid_rejected(tmp_path, tiny_dataset):
    bad = tmp_path / "bad_edges.csv"
    bad.write_text("txId1,txId2\n10,999\n")
    with pytest.raises(IntegrityError, match="999"):
        ingest(tiny_dataset["features"], bad, tiny_dataset["classes"], local_count=2)


def test_wrong_column_count_rejected(tmp_path, tiny_dataset):
    bad = tmp_path / "bad_features.csv"
    bad.write_text("10,1,0.1,0.2\n20,1,0.3\n30,2,0.5,0.6\n")
    with pytest.raises(ParseError):
        ingest(bad, tiny_dataset["edges"], tiny_dataset["classes"], local_count=2)


def test_non_numeric_feature_rejected_with_line(tmp_path, tiny_dataset):
    bad = tmp_path / "bad_features.csv"
    bad.write_text("10,1,0.1,0.2\n20,1,oops,0.4\n30,2,0.5,0.6\n")
    with pytest.raises(ParseError, match="line 2"):
        ingest(bad, tiny_dataset["edges"], tiny_dataset["classes"], local_count=2)


def test_duplicate_txid_rejected(tmp_path, tiny_dataset):
    bad = tmp_path / "bad_features.csv"
    bad.write_text("10,1,0.1,0.2\n10,1,0.3,0.4\n30,2,0.5,0.6\n")
    with pytest.raises(IntegrityError, match="10"):
        ingest(bad, tiny_dataset["edges"], tiny_dataset["classes"], local_count=2)


def test_cross_step_edge_rejected(tmp_path, tiny_dataset):
    bad = tmp_path / "bad_edges.csv"
    bad.write_text("txId1,txId2\n10,30\n")
    with pytest.raises(IntegrityError, match="different time steps"):
        ingest(tiny_dataset["features"], bad, tiny_dataset["classes"], local_count=2)


def test_self_loop_rejected(tmp_path, tiny_dataset):
    bad = tmp_path / "bad_edges.csv"
    bad.write_text("txId1,txId2\n10,10\n")
    with pytest.raises(IntegrityError, match="self-loop"):
        ingest(tiny_dataset["features"], bad, tiny_dataset["classes"], local_count=2)


def test_duplicate_edges_collapsed_with_warning(tmp_path, tiny_dataset):
    dup = tmp_path / "dup_edges.csv"
    dup.write_text("txId1,txId2\n10,20\n10,20\n")
    g = ingest(tiny_dataset["features"], dup, tiny_dataset["classes"], local_count=2)
    assert g.num_edges == 1
    assert any("duplicate" in w for w in g.warnings)


def test_slice_contents(tiny_graph):
    s1 = graph_slice(tiny_graph, 1)
    assert s1.node_indices.tolist() == [0, 1]
    assert s1.edges.tolist() == [[0, 1]]
    s2 = graph_slice(tiny_graph, 2)
    assert s2.node_indices.tolist() == [2]
    assert s2.edges.size == 0


def test_slice_out_of_range(tiny_graph):
    with pytest.raises(IndexError):
        tiny_graph.slice(0)
    with pytest.raises(IndexError):
        tiny_graph.slice(3)


def test_slices_partition_graph(synth_graph):
    nodes = 0
    edges = 0
    for t in range(1, synth_graph.num_steps + 1):
        sl = synth_graph.slice(t)
        nodes += sl.node_indices.size
        edges += len(sl.edges)
    assert nodes == synth_graph.num_nodes
    assert edges == synth_graph.num_edges


def test_validate_tiny(tiny_graph):
    report = validate(tiny_graph)
    assert report.node_count == 3
    assert report.edge_count == 1
    assert report.illicit_count == 1
    assert report.licit_count == 1
    assert report.unknown_count == 1
    assert report.time_step_count == 2
    assert report.per_step_node_counts == [2, 1]
    assert report.cross_step_edge_count == 0
    assert report.components_per_step == [1, 1]
    assert report.warnings == []
    assert (
        report.illicit_count + report.licit_count + report.unknown_count
        == report.node_count
    )


def test_validate_flags_multi_component_step():
    # Two disconnected pairs in one step.
    features = np.array([[1, 0.0], [1, 1.0], [1, 2.0], [1, 3.0]])
    g = build_graph(
        [1, 2, 3, 4], [1, 1, 1, 1], features, [[0, 1], [2, 3]],
        [LICIT, LICIT, ILLICIT, UNKNOWN],
    )
    report = validate(g)
    assert report.components_per_step == [2]
    assert any("2 connected components" in w for w in report.warnings)


def test_export_ingest_round_trip(synth_graph, tmp_path):
    paths = export_csv(synth_graph, tmp_path / "export")
    again = ingest(paths["features"], paths["edges"], paths["classes"],
                   local_count=synth_graph.nodes.local_count)
    assert np.array_equal(again.nodes.node_ids, synth_graph.nodes.node_ids)
    assert np.array_equal(again.nodes.features, synth_graph.nodes.features)
    assert np.array_equal(again.edges, synth_graph.edges)
    assert np.array_equal(again.labels, synth_graph.labels)


def test_edge_time_locality_holds(synth_graph):
    ts = synth_graph.nodes.time_steps
    assert np.all(ts[synth_graph.edges[:, 0]] == ts[synth_graph.edges[:, 1]])


def test_neighbor_lookup(tiny_graph):
    assert tiny_graph.out_neighbors(0).tolist() == [1]
    assert tiny_graph.in_neighbors(1).tolist() == [0]
    assert tiny_graph.in_neighbors(0).size == 0
    assert tiny_graph.out_neighbors(2).size == 0
