import pytest

from decompnet import (
    NetConfig,
    layers_for_variance_index,
    layers_from_variance,
    variance_index,
)

# (variance index, spatial dims, layers) for every benchmark dataset row
LAYER_TABLE = [
    ("retina", 0.11, 2, 5),
    ("pneumonia", 0.25, 2, 4),
    ("derma", 0.13, 2, 5),
    ("blood", 0.10, 2, 5),
    ("organ_a", 0.09, 2, 5),
    ("organ_c", 0.09, 2, 5),
    ("organ_s", 0.09, 2, 5),
    ("path", 0.07, 2, 6),
    ("oct", 0.15, 2, 5),
    ("chest", 0.25, 2, 4),
    ("tissue", 0.10, 2, 5),
    ("organ_3d", 0.09, 3, 6),
    ("nodule_3d", 0.25, 3, 5),
    ("fracture_3d", 0.18, 3, 5),
    ("adrenal_3d", 0.25, 3, 5),
    ("vessel_3d", 0.25, 3, 5),
    ("synapse_3d", 0.25, 3, 5),
]


def test_binary_task_variance_is_quarter():
    # two classes min-max-normalize to {0, 1}: population variance 0.25
    assert variance_index([0.46, 0.55]) == pytest.approx(0.25)
    assert variance_index([12.0, 300.0]) == pytest.approx(0.25)


def test_variance_of_identical_means_is_zero():
    assert variance_index([3.0, 3.0, 3.0]) == 0.0


def test_variance_requires_two_classes():
    with pytest.raises(ValueError):
        variance_index([1.0])


@pytest.mark.parametrize("name,var,dims,layers", LAYER_TABLE)
def test_layer_rule_reproduces_table(name, var, dims, layers):
    assert layers_for_variance_index(var, dims) == layers


def test_layers_from_raw_means():
    assert layers_from_variance([0.1, 0.9], 2) == 4  # variance 0.25
    means = [0.0, 0.5, 1.0]  # variance ~0.167
    assert layers_from_variance(means, 2) == 5
    assert layers_from_variance(means, 3) == 5


def test_config_invariants():
    NetConfig(in_channels=6, num_classes=3, hidden_channels=72, groups=3)
    with pytest.raises(ValueError):
        NetConfig(in_channels=6, num_classes=3, hidden_channels=70, groups=3)
    with pytest.raises(ValueError):
        NetConfig(in_channels=6, num_classes=3, layers=2)
    with pytest.raises(ValueError):
        NetConfig(in_channels=6, num_classes=3, layers=9)
    with pytest.raises(ValueError):
        NetConfig(in_channels=6, num_classes=3, task="regression")
    with pytest.raises(ValueError):
        NetConfig(in_channels=6, num_classes=1)
