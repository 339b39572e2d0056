# ===========================================================================
# File: app/tests/models/test_experiment_config.py
# ===========================================================================
import math
import pytest
from pydantic import ValidationError

from app.core.config import logger
from app.models.experiment import ExperimentConfig, ResultRow


@pytest.mark.parametrize("experiment,incident,mesh,reference", [
    ("fundamental", "fundamental", "uniform", "exact"),
    ("ntd-sweep", "fundamental", "uniform", "exact"),
    ("scatterer", "mode", "scatterer", "overkill"),
    ("gamma-sweep", "mode", "layer", "exact"),
    ("custom", "mode", "uniform", "exact"),
])
def test_experiment_defaults(experiment, incident, mesh, reference):
    logger.info(f"Testing defaults of the {experiment} experiment")
    config = ExperimentConfig(experiment=experiment)
    assert (config.incident, config.mesh, config.reference) == (incident, mesh, reference)


def test_scalars_are_wrapped_and_complex_parsed():
    logger.info("Testing scalar-to-list coercion and complex refractive index parsing")
    config = ExperimentConfig(k=8, h=0.2, Np=9, M=15, gamma=0.5, n_inside="9+4i")
    assert config.k == [8.0] and config.h == [0.2] and config.Np == [9]
    assert config.gamma == [0.5]
    assert config.n_inside == 9 + 4j


def test_domain_length_and_source():
    logger.info("Testing the derived domain length and source point")
    fundamental = ExperimentConfig(experiment="fundamental")
    assert fundamental.domain_length(8.0) == pytest.approx(2 * math.pi / 8)
    assert ExperimentConfig(experiment="scatterer").domain_length(8.0) == 1.0
    assert ExperimentConfig(R=0.7).domain_length(8.0) == 0.7
    assert fundamental.source_point(1.0) == (-1.5, 0.3)


@pytest.mark.parametrize("values", [
    dict(k=[math.pi]),
    dict(k=[0.0]),
    dict(h=[]),
    dict(Np=[2]),
    dict(M=[0]),
    dict(gamma=[-0.5]),
    dict(n_inside="1-1i"),
    dict(mesh="layer", reference="overkill"),
    dict(experiment="scatterer", reference="exact"),
    dict(experiment="unknown"),
    dict(unknown_key=1),
])
def test_invalid_configurations(values):
    logger.info(f"Testing rejection of {values}")
    with pytest.raises(ValidationError):
        ExperimentConfig(**values)


def test_result_row_status():
    logger.info("Testing ResultRow.ok")
    row = ResultRow(experiment="custom", k=8, R=1, H=1, h=0.2, Np=7, M=15, gamma=0)
    assert row.ok
    assert math.isnan(row.rel_l2_error)
    assert not row.model_copy(update={"status": "SingularSystem"}).ok
