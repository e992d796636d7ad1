import numpy as np
import pytest

from src.choicedata import (
    AlternativeRecord,
    AttributeKind,
    AttributeSchema,
    ChoiceDataset,
    ChoiceSituation,
    fold_assignment,
    load_csv,
    split_kfold,
    validate_dataset,
    write_csv,
)
from src.core.errors import DataParseError, IntegrityError, SchemaError
from tests.helpers import make_dataset

SCHEMA = AttributeSchema(
    attribute_names=["cost", "time"],
    attribute_kinds=[AttributeKind.CONTINUOUS, AttributeKind.CONTINUOUS],
    covariate_names=["income"],
)

GOOD_CSV = """# produced by a test
situation_id,respondent_id,alt_id,chosen,available,cost,time,income
s1,r1,A,1,1,14,3,2
s1,r1,B,0,1,18,5,2
s1,r1,C,0,0,22,1.5,2
s2,r2,A,0,1,26,24,4
s2,r2,B,1,1,14,72,4
"""


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_loads_and_pads_narrow_situations(self, tmp_path):
        ds = load_csv(write(tmp_path, GOOD_CSV), SCHEMA)
        assert len(ds) == 2
        assert ds.n_alternatives == 3
        assert list(ds.chosen) == [0, 1]
        assert ds.present[1].tolist() == [True, True, False]
        assert ds.available[0].tolist() == [True, True, False]
        assert ds.attribute("time")[0, 2] == 1.5
        assert ds.covariate("income").tolist() == [2.0, 4.0]
        assert ds.alt_ids[1, 2] == ""

    def test_write_then_load_gives_equal_dataset(self, tmp_path):
        ds = load_csv(write(tmp_path, GOOD_CSV), SCHEMA)
        path = write_csv(ds, tmp_path / "copy.csv", header_comment="copy")
        assert path.read_text().startswith("# copy\n")
        assert load_csv(path, SCHEMA) == ds

    def test_missing_column(self, tmp_path):
        lines = GOOD_CSV.splitlines()
        text = "\n".join(lines[:1] + [",".join(line.split(",")[:6] + line.split(",")[7:]) for line in lines[1:]])
        with pytest.raises(SchemaError) as info:
            load_csv(write(tmp_path, text), SCHEMA)
        assert info.value.column == "time"

    def test_non_numeric_cell_reports_file_row(self, tmp_path):
        text = GOOD_CSV.replace("s2,r2,A,0,1,26,", "s2,r2,A,0,1,abc,")
        with pytest.raises(DataParseError) as info:
            load_csv(write(tmp_path, text), SCHEMA)
        # comment line, header line, then s2/A is the fourth data row
        assert info.value.row == 6
        assert info.value.column == "cost"

    def test_missing_value(self, tmp_path):
        text = GOOD_CSV.replace("s1,r1,B,0,1,18,5,2", "s1,r1,B,0,1,,5,2")
        with pytest.raises(DataParseError, match="missing value"):
            load_csv(write(tmp_path, text), SCHEMA)

    def test_two_chosen_rows(self, tmp_path):
        text = GOOD_CSV.replace("s1,r1,B,0,1", "s1,r1,B,1,1")
        with pytest.raises(IntegrityError) as info:
            load_csv(write(tmp_path, text), SCHEMA)
        assert info.value.situation_id == "s1"

    def test_no_chosen_row(self, tmp_path):
        text = GOOD_CSV.replace("s2,r2,B,1,1", "s2,r2,B,0,1")
        with pytest.raises(IntegrityError, match="no chosen row"):
            load_csv(write(tmp_path, text), SCHEMA)

    def test_inconsistent_covariate(self, tmp_path):
        text = GOOD_CSV.replace("s2,r2,B,1,1,14,72,4", "s2,r2,B,1,1,14,72,5")
        with pytest.raises(IntegrityError, match="inconsistent"):
            load_csv(write(tmp_path, text), SCHEMA)

    def test_flag_must_be_binary(self, tmp_path):
        text = GOOD_CSV.replace("s1,r1,C,0,0", "s1,r1,C,0,2")
        with pytest.raises(DataParseError, match="0 or 1"):
            load_csv(write(tmp_path, text), SCHEMA)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv", SCHEMA)


PRODUCT_CSV = """situation_id,respondent_id,alt_id,chosen,available,cost,time,income,product
s1,r1,A,1,1,14,3,2,PD1
s1,r1,B,0,1,18,5,2,PD1
s2,r2,A,0,1,26,24,4,PD3
s2,r2,B,1,1,14,72,4,PD3
s3,r2,A,0,1,22,12,4,PD1
s3,r2,B,1,1,18,24,4,PD1
"""


class TestSegments:
    def test_loads_product_per_situation(self, tmp_path):
        ds = load_csv(write(tmp_path, PRODUCT_CSV), SCHEMA)
        assert ds.segments.tolist() == ["PD1", "PD3", "PD1"]
        assert ds.segment_labels == ["PD1", "PD3"]
        assert ds.situation(1).segment == "PD3"

    def test_segment_subset(self, tmp_path):
        ds = load_csv(write(tmp_path, PRODUCT_CSV), SCHEMA)
        pd1 = ds.segment("PD1")
        assert pd1.situation_ids.tolist() == ["s1", "s3"]
        assert pd1.segment_labels == ["PD1"]
        assert pd1.chosen.tolist() == [0, 1]

    def test_unknown_segment(self, tmp_path):
        ds = load_csv(write(tmp_path, PRODUCT_CSV), SCHEMA)
        with pytest.raises(SchemaError, match="PD2"):
            ds.segment("PD2")

    def test_write_then_load_keeps_products(self, tmp_path):
        ds = load_csv(write(tmp_path, PRODUCT_CSV), SCHEMA)
        path = write_csv(ds, tmp_path / "copy.csv")
        assert path.read_text().splitlines()[0].endswith(",product")
        assert load_csv(path, SCHEMA) == ds

    def test_unsegmented_data_writes_no_product_column(self, tmp_path):
        ds = load_csv(write(tmp_path, GOOD_CSV), SCHEMA)
        assert ds.segment_labels == []
        assert "product" not in write_csv(ds, tmp_path / "copy.csv").read_text()

    def test_inconsistent_product(self, tmp_path):
        text = PRODUCT_CSV.replace("s3,r2,B,1,1,18,24,4,PD1", "s3,r2,B,1,1,18,24,4,PD2")
        with pytest.raises(IntegrityError, match="inconsistent") as info:
            load_csv(write(tmp_path, text), SCHEMA)
        assert info.value.situation_id == "s3"

    def test_product_is_not_an_attribute_name(self):
        with pytest.raises(ValueError):
            AttributeSchema(attribute_names=["product"], attribute_kinds=[AttributeKind.CONTINUOUS])


class TestDatasetModel:
    def test_from_situations_round_trip(self):
        situation = ChoiceSituation(
            situation_id="s1",
            respondent_id="r1",
            alternatives=(
                AlternativeRecord("A", (14.0, 3.0)),
                AlternativeRecord("B", (26.0, 1.5), available=False),
            ),
            chosen="A",
            covariates=(3.0,),
            schema=SCHEMA,
        )
        ds = ChoiceDataset.from_situations(SCHEMA, [situation])
        assert ds.situation(0) == situation
        assert ds.chosen_mask().tolist() == [[True, False]]

    def test_wrong_attribute_count(self):
        situation = ChoiceSituation("s1", "r1", (AlternativeRecord("A", (1.0,)),), None, (0.0,), SCHEMA)
        with pytest.raises(SchemaError):
            ChoiceDataset.from_situations(SCHEMA, [situation])

    def test_schema_rejects_duplicates_and_missing_levels(self):
        with pytest.raises(ValueError):
            AttributeSchema(attribute_names=["a", "a"], attribute_kinds=["continuous", "continuous"])
        with pytest.raises(ValueError):
            AttributeSchema(attribute_names=["a"], attribute_kinds=["categorical"], levels={"a": [1.0]})

    def test_schema_from_mapping(self):
        schema = AttributeSchema.from_mapping({
            "attributes": [{"name": "cost", "bounds": [14, 26]}, {"name": "rep", "kind": "categorical",
                                                                  "levels": [0, 1, 2]}],
            "covariates": ["income"],
        })
        assert schema.attribute_names == ["cost", "rep"]
        assert schema.kind("rep") == AttributeKind.CATEGORICAL
        assert schema.bounds["cost"] == (14.0, 26.0)

    def test_arrays_are_read_only(self, binary_cost_dataset):
        with pytest.raises(ValueError):
            binary_cost_dataset.attributes[0, 0, 0] = 1.0


class TestValidateDataset:
    def test_clean(self, courier_choices):
        assert validate_dataset(courier_choices).is_clean

    def test_too_few_available(self):
        ds = make_dataset([[1.0, 2.0], [3.0, 1.0]], chosen=[0, 0], available=[[True, False], [True, True]])
        report = validate_dataset(ds)
        assert report.has_errors
        assert "too-few-available" in report.codes

    def test_chosen_unavailable(self):
        ds = make_dataset([[1.0, 2.0, 3.0]], chosen=[2], available=[[True, True, False]])
        assert "unavailable-chosen" in validate_dataset(ds).codes

    def test_constant_attribute_is_not_identified(self):
        rng = np.random.default_rng(0)
        attributes = np.stack([rng.normal(size=(20, 3)), np.full((20, 3), 5.0)], axis=-1)
        ds = make_dataset(attributes, chosen=np.zeros(20, dtype=int), names=("x", "flat"))
        report = validate_dataset(ds)
        assert not report.has_errors
        (finding,) = report.by_code("non-identified")
        assert "'flat'" in finding.message

    def test_collinear_attributes(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(30, 3))
        ds = make_dataset(np.stack([x, 2.0 * x], axis=-1), chosen=np.zeros(30, dtype=int), names=("x", "twice"))
        (finding,) = validate_dataset(ds).by_code("collinear-attributes")
        assert "'x'" in finding.message and "'twice'" in finding.message

    def test_out_of_range_level(self):
        schema = AttributeSchema(attribute_names=["rep"], attribute_kinds=["categorical"], levels={"rep": [0, 1, 2]})
        ds = ChoiceDataset(
            schema=schema,
            situation_ids=np.array(["s1"], dtype=object),
            respondent_ids=np.array(["r1"], dtype=object),
            alt_ids=np.array([["A", "B"]], dtype=object),
            attributes=np.array([[[0.0], [3.0]]]),
            available=np.ones((1, 2), dtype=bool),
            present=np.ones((1, 2), dtype=bool),
            chosen=np.array([0]),
            covariates=np.zeros((1, 0)),
        )
        report = validate_dataset(ds)
        assert report.codes == ["attribute-out-of-range"]

    def test_report_lines_are_tab_separated(self, tmp_path):
        ds = make_dataset([[1.0, 2.0]], chosen=[0], available=[[True, False]])
        text = validate_dataset(ds).write(tmp_path / "report.txt").read_text()
        assert text.splitlines()[0].split("\t")[:2] == ["ERROR", "too-few-available"]


class TestFolds:
    def test_fold_sizes_differ_by_at_most_one(self):
        ds = make_dataset(np.zeros((549, 2)), chosen=np.zeros(549, dtype=int))
        sizes = sorted(len(test) for _, test in split_kfold(ds, 5, seed=1))
        assert sizes == [109, 110, 110, 110, 110]

    def test_partition_is_disjoint_and_complete(self):
        ds = make_dataset(np.zeros((53, 2)), chosen=np.zeros(53, dtype=int))
        pairs = split_kfold(ds, 5, seed=2)
        tested = np.concatenate([test.situation_ids for _, test in pairs])
        assert sorted(tested) == sorted(ds.situation_ids)
        for train, test in pairs:
            assert set(train.situation_ids).isdisjoint(test.situation_ids)
            assert len(train) + len(test) == len(ds)

    def test_deterministic_given_seed(self):
        ds = make_dataset(np.zeros((40, 2)), chosen=np.zeros(40, dtype=int))
        assert np.array_equal(fold_assignment(ds, 5, 9), fold_assignment(ds, 5, 9))
        assert not np.array_equal(fold_assignment(ds, 5, 9), fold_assignment(ds, 5, 10))

    def test_respondents_stay_together(self):
        respondents = [f"r{i // 3}" for i in range(30)]
        ds = make_dataset(np.zeros((30, 2)), chosen=np.zeros(30, dtype=int), respondents=respondents)
        assignment = fold_assignment(ds, 5, 4, by="respondent")
        for r in set(respondents):
            rows = [i for i, rid in enumerate(respondents) if rid == r]
            assert len(set(assignment[rows])) == 1

    @pytest.mark.parametrize("folds", [0, 1])
    def test_needs_two_folds(self, folds):
        ds = make_dataset(np.zeros((10, 2)), chosen=np.zeros(10, dtype=int))
        with pytest.raises(ValueError):
            split_kfold(ds, folds, seed=1)

    def test_more_folds_than_situations(self):
        ds = make_dataset(np.zeros((3, 2)), chosen=np.zeros(3, dtype=int))
        with pytest.raises(ValueError):
            split_kfold(ds, 5, seed=1)
