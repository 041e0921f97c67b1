import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from oodcf import dataset, density, partition, projection
from oodcf.errors import DegenerateNormalizationWarning

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
WINE_LIKE = DATA_DIR / "wine_like.csv"


@dataclass
class FittedToy:
    train: dataset.LabeledDataset
    test: dataset.LabeledDataset
    projection: projection.ProjectionModel
    part: partition.Partition
    model: density.PartitionDensityModel
    Z_train: np.ndarray
    Z_eval: np.ndarray


def fit_toy(seed=0, n_per_class=1000, n_ood=1000) -> FittedToy:
    ds = dataset.make_toy(n_per_class, n_ood, seed)
    train, test = dataset.split(ds, dataset.SplitSpec(0.8, seed))
    proj = projection.fit_projection(
        train.features[~train.ood_flag], 2, with_scaling=False)
    Z_train = projection.project(proj, train.features)
    Z_eval = projection.project(proj, test.id_rows().features)
    with warnings.catch_warnings():
        # k=2 has a single cardinality, so the normalization fallback fires
        warnings.simplefilter("ignore", DegenerateNormalizationWarning)
        part = partition.search_partition(Z_train, train.class_label, Z_eval)
    model = density.fit_partition_density(Z_train, train.class_label, part)
    return FittedToy(train=train, test=test, projection=proj, part=part,
                     model=model, Z_train=Z_train, Z_eval=Z_eval)


def fit_wine(seed=0) -> FittedToy:
    table = dataset.load_csv(WINE_LIKE, "target")
    ds = dataset.apply_ood_rule(table, dataset.OodRule(kind="class_equals", value=2))
    train, test = dataset.split(ds, dataset.SplitSpec(0.8, seed))
    proj = projection.fit_projection(
        train.features[~train.ood_flag], train.n_features, with_scaling=True)
    Z_train = projection.project(proj, train.features)
    Z_eval = projection.project(proj, test.id_rows().features)
    part = partition.search_partition(Z_train, train.class_label, Z_eval)
    model = density.fit_partition_density(Z_train, train.class_label, part)
    return FittedToy(train=train, test=test, projection=proj, part=part,
                     model=model, Z_train=Z_train, Z_eval=Z_eval)


@pytest.fixture(scope="session")
def toy_fit() -> FittedToy:
    return fit_toy(seed=0)


@pytest.fixture(scope="session")
def wine_fit() -> FittedToy:
    return fit_wine(seed=0)


@pytest.fixture(scope="session")
def toy_ood(toy_fit) -> np.ndarray:
    return toy_fit.test.ood_rows().features
