import pytest

from travelsat.errors import SchemaError
from travelsat.schema import (
    CATEGORICAL,
    NUMERIC,
    Variable,
    VariableSchema,
    default_schema,
    load_default_schema_resource,
    load_schema,
    save_schema,
)

EXPECTED_NAMES = (
    "gender", "age", "income", "education_level", "car_access",
    "public_transit_station", "parking_lot", "hospital", "shopping_mall",
    "restaurant",
    "commuting_time", "commuting_mode", "trips_per_weekday",
    "past_commuting_time", "past_commuting_mode",
    "peer_commuting_time", "peer_commuting_mode",
)


def test_default_schema_names_and_order():
    assert default_schema().names == EXPECTED_NAMES


def test_default_schema_dimension_counts():
    schema = default_schema()
    assert len(schema.by_dimension("socioeconomics")) == 5
    assert len(schema.by_dimension("built_environment")) == 5
    assert len(schema.by_dimension("travel_characteristics")) == 3
    assert len(schema.by_dimension("reference_points")) == 4
    assert len(schema.predictors) == 17


def test_label_variable_bounds():
    label = default_schema().label
    assert label.name == "travel_satisfaction"
    assert label.kind == NUMERIC
    assert label.minimum == 1.0 and label.maximum == 7.0


def test_mode_category_labels():
    mode = default_schema().variable("commuting_mode")
    assert mode.label_for(3) == "subway"
    assert mode.code_for("private car") == 6
    assert mode.codes == (1, 2, 3, 4, 5, 6, 7, 8, 9)


def test_category_lookup_errors():
    mode = default_schema().variable("commuting_mode")
    with pytest.raises(SchemaError):
        mode.label_for(12)
    with pytest.raises(SchemaError):
        mode.code_for("rocket")
    with pytest.raises(SchemaError):
        default_schema().variable("nonexistent")


def test_duplicate_names_rejected():
    v = Variable("age", "socioeconomics", NUMERIC)
    with pytest.raises(SchemaError):
        VariableSchema(predictors=(v, v))


def test_categorical_needs_two_categories():
    with pytest.raises(SchemaError):
        Variable("gender", "socioeconomics", CATEGORICAL, categories=((0, "x"),))


def test_unknown_dimension_rejected():
    with pytest.raises(SchemaError):
        Variable("age", "somewhere", NUMERIC)


def test_schema_resource_matches_builtin():
    assert load_default_schema_resource() == default_schema()


def test_schema_file_round_trip(tmp_path):
    path = tmp_path / "schema.json"
    save_schema(default_schema(), path)
    assert load_schema(path) == default_schema()


def test_fingerprint_changes_with_content():
    schema = default_schema()
    reduced = VariableSchema(predictors=schema.predictors[:5])
    assert schema.fingerprint() != reduced.fingerprint()
    assert schema.fingerprint() == default_schema().fingerprint()
