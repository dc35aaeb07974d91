import numpy as np
import pytest

from mqttguard.dataset import (
    MQTT_CATEGORICAL_COLUMNS,
    MQTT_FEATURE_COLUMNS,
    Dataset,
    LabelEncoding,
    encode_class_labels,
    filter_classes,
    load_csv,
    mqtt_schema,
    save_csv,
    schema_from_dict,
)
from mqttguard.errors import (
    EmptyDatasetError,
    MissingColumnError,
    ParseError,
    SchemaMismatchError,
    UnknownClassError,
)

from conftest import make_dataset


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


SMALL_CSV = (
    "a,b,flag,target\n"
    "1.5,2,0x18,dos\n"
    "2.5,3,0x10,legitimate\n"
    "0.5,1,0x18,dos\n"
    "9.0,4,0x00,bruteforce\n"
)


class TestLoadCsv:
    def test_basic_shape(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, SMALL_CSV), categorical_columns=["flag"])
        assert ds.n_rows == 4
        assert ds.n_features == 3
        assert ds.feature_names == ("a", "b", "flag")
        assert ds.column_kind("flag") == "categorical"
        assert list(ds.labels) == ["dos", "legitimate", "dos", "bruteforce"]

    def test_33_column_file_matches_schema(self, tmp_path):
        header = ",".join(MQTT_FEATURE_COLUMNS) + ",target"
        row = ",".join("1" if c not in MQTT_CATEGORICAL_COLUMNS else "0x18"
                       for c in MQTT_FEATURE_COLUMNS)
        text = header + "\n" + "\n".join(f"{row},dos" for _ in range(4)) + "\n"
        ds = load_csv(write_csv(tmp_path, text), schema=mqtt_schema())
        assert ds.n_rows == 4
        assert ds.n_features == 33
        # the golden ten are a subset of the schema
        from mqttguard.feature_selection import GOLDEN_FEATURES
        assert set(GOLDEN_FEATURES) <= set(ds.feature_names)

    def test_missing_schema_column(self, tmp_path):
        keep = [c for c in MQTT_FEATURE_COLUMNS if c != "mqtt.len"]
        header = ",".join(keep) + ",target"
        row = ",".join("1" for _ in keep)
        text = header + "\n" + row + ",dos\n"
        with pytest.raises(MissingColumnError, match="mqtt.len"):
            load_csv(write_csv(tmp_path, text), schema=mqtt_schema())

    def test_missing_target(self, tmp_path):
        with pytest.raises(MissingColumnError):
            load_csv(write_csv(tmp_path, "a,b\n1,2\n"))

    def test_empty_dataset(self, tmp_path):
        with pytest.raises(EmptyDatasetError):
            load_csv(write_csv(tmp_path, "a,target\n"))

    def test_non_numeric_cell(self, tmp_path):
        path = write_csv(tmp_path, "a,target\n1,dos\nbogus,dos\n")
        with pytest.raises(ParseError) as err:
            load_csv(path)
        assert err.value.row == 1
        assert err.value.column == "a"

    def test_empty_cell_rejected(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write_csv(tmp_path, "a,b,target\n1,,dos\n"))

    def test_infinite_cell_rejected(self, tmp_path):
        with pytest.raises(ParseError):
            load_csv(write_csv(tmp_path, "a,target\ninf,dos\n"))

    def test_roundtrip_stability(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, SMALL_CSV), categorical_columns=["flag"])
        out = tmp_path / "echo.csv"
        save_csv(ds, out)
        again = load_csv(out, categorical_columns=["flag"])
        assert ds.equals(again)

    def test_roundtrip_awkward_floats(self, tmp_path):
        rng = np.random.default_rng(3)
        values = rng.normal(size=(50, 2)) * np.array([1e-7, 1e9])
        ds = make_dataset(values, ["dos"] * 50)
        out = tmp_path / "floats.csv"
        save_csv(ds, out)
        again = load_csv(out)
        assert np.array_equal(ds.matrix(), again.matrix())


class TestFilterClasses:
    def test_keeps_requested_rows(self, tmp_path):
        text = (
            "a,target\n"
            "1,dos\n2,legitimate\n3,flood\n4,bruteforce\n5,dos\n6,slowite\n"
        )
        ds = load_csv(write_csv(tmp_path, text))
        kept = filter_classes(ds, {"legitimate", "dos", "bruteforce"})
        assert kept.n_rows == 4
        assert list(kept.labels) == ["dos", "legitimate", "bruteforce", "dos"]

    def test_identity_when_keeping_all(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, SMALL_CSV), categorical_columns=["flag"])
        assert filter_classes(ds, {"dos", "legitimate", "bruteforce"}).equals(ds)

    def test_hand_counted_subset(self):
        ds = make_dataset(np.zeros((5, 2)), ["dos", "legitimate", "dos", "legitimate", "legitimate"])
        assert filter_classes(ds, {"dos"}).n_rows == 2

    def test_unknown_class(self):
        ds = make_dataset(np.zeros((2, 1)), ["dos", "dos"])
        with pytest.raises(UnknownClassError):
            filter_classes(ds, {"dos", "nosuch"})

    def test_case_insensitive_matching(self):
        ds = make_dataset(np.zeros((3, 1)), ["DoS", " Bruteforce ", "legitimate"])
        assert filter_classes(ds, {"DOS"}).n_rows == 1

    def test_disjoint_union_counts(self):
        rng = np.random.default_rng(0)
        labels = rng.choice(["a", "b", "c", "d"], size=100)
        ds = make_dataset(np.zeros((100, 1)), labels)
        both = filter_classes(ds, {"a", "b"}).n_rows
        assert both == filter_classes(ds, {"a"}).n_rows + filter_classes(ds, {"b"}).n_rows


class TestEncodeClassLabels:
    def test_fixed_codes_for_canonical_classes(self):
        ds = make_dataset(np.zeros((3, 1)), ["legitimate", "Bruteforce", "DoS"])
        encoded, enc = encode_class_labels(ds)
        assert enc.names == ("bruteforce", "dos", "legitimate")
        assert list(encoded.labels) == [2, 0, 1]

    def test_single_class_gets_code_zero(self):
        ds = make_dataset(np.zeros((2, 1)), ["dos", "dos"])
        encoded, enc = encode_class_labels(ds)
        assert enc.names == ("dos",)
        assert list(encoded.labels) == [0, 0]

    def test_lexicographic_fallback(self):
        ds = make_dataset(np.zeros((3, 1)), ["a", "c", "b"])
        _, enc = encode_class_labels(ds)
        assert enc.mapping == {"a": 0, "b": 1, "c": 2}

    def test_inverse_then_reencode_is_stable(self):
        ds = make_dataset(np.zeros((4, 1)), ["dos", "bruteforce", "legitimate", "dos"])
        encoded, enc = encode_class_labels(ds)
        names = enc.decode(encoded.labels)
        assert np.array_equal(enc.encode(names), encoded.labels)

    def test_refusing_double_encode(self):
        ds = make_dataset(np.zeros((2, 1)), ["dos", "dos"])
        encoded, _ = encode_class_labels(ds)
        with pytest.raises(SchemaMismatchError):
            encode_class_labels(encoded)


class TestSchemaDocument:
    def test_parse(self):
        schema, target = schema_from_dict({
            "target_column": "label",
            "columns": [
                {"name": "a", "kind": "numeric"},
                {"name": "b", "kind": "categorical"},
            ],
        })
        assert target == "label"
        assert schema[1].kind == "categorical"
        assert [c.position for c in schema] == [0, 1]

    def test_duplicate_names_rejected(self):
        with pytest.raises(SchemaMismatchError):
            schema_from_dict({"columns": [{"name": "a"}, {"name": "a"}]})

    def test_bad_kind_rejected(self):
        with pytest.raises(SchemaMismatchError):
            schema_from_dict({"columns": [{"name": "a", "kind": "float"}]})


class TestLabelEncoding:
    def test_bijective(self):
        enc = LabelEncoding(names=("x", "y", "z"))
        codes = enc.encode(["z", "x", "y"])
        assert list(codes) == [2, 0, 1]
        assert list(enc.decode(codes)) == ["z", "x", "y"]

    def test_unknown_name(self):
        enc = LabelEncoding(names=("x",))
        with pytest.raises(UnknownClassError):
            enc.encode(["nope"])
