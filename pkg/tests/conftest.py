import json

import pytest

from travelsat.synthesize import default_marginals, marginals_from_dict, synthesize

# category weights with no rare codes, so small train splits still contain
# every one-hot column and linear fits stay full rank
DENSE_CATEGORIES = {
    "gender": {"0": 55, "1": 45},
    "education_level": {"1": 12, "2": 14, "3": 16, "4": 18, "5": 25, "6": 15},
    "car_access": {"0": 30, "1": 25, "2": 20, "3": 15, "4": 10},
    "commuting_mode": {"1": 12, "2": 10, "3": 14, "4": 8, "5": 12, "6": 20,
                       "7": 8, "8": 8, "9": 8},
    "past_commuting_mode": {"1": 12, "2": 10, "3": 14, "4": 8, "5": 12, "6": 20,
                            "7": 8, "8": 8, "9": 8},
    "peer_commuting_mode": {"1": 12, "2": 10, "3": 14, "4": 8, "5": 12, "6": 20,
                            "7": 8, "8": 8, "9": 8},
}


def dense_marginal_dict() -> dict:
    from importlib import resources
    base = json.loads(resources.files("travelsat")
                      .joinpath("resources/default_marginals.json")
                      .read_text("utf-8"))
    for name, probs in DENSE_CATEGORIES.items():
        base[name]["probs"] = probs
    return base


@pytest.fixture(scope="session")
def dense_marginals():
    return marginals_from_dict(dense_marginal_dict())


@pytest.fixture(scope="session")
def dense_marginals_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("marginals") / "dense.json"
    path.write_text(json.dumps(dense_marginal_dict()), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def small_dataset():
    return synthesize(120, seed=5, label_rule="linear", noise=0.2)


@pytest.fixture(scope="session")
def noiseless_dataset():
    return synthesize(40, seed=3, label_rule="linear", noise=0.0)


@pytest.fixture(scope="session")
def dense_dataset(dense_marginals):
    return synthesize(500, seed=11, label_rule="linear", noise=0.2,
                      marginals=dense_marginals)
