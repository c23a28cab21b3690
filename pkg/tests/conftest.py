import numpy as np
import pytest
from hypothesis import settings

from biomeval import ModelSpec, Protocol, SampleRecord

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


def make_sample(sid, subject, role="probe", group="dev", label="all"):
    return SampleRecord(
        sample_id=sid,
        subject_id=subject,
        path=f"images/{sid}.png",
        role=role,
        group=group,
        sub_protocol=label if role == "probe" else "",
    )


def make_split_protocol(name="fixture"):
    """Two dev subjects and two eval subjects, one model each, two probes each."""
    samples, models = [], []
    for subject, group in [("A", "dev"), ("B", "dev"), ("C", "eval"), ("D", "eval")]:
        samples.append(make_sample(f"{subject}-e0", subject, "enroll", group))
        samples.append(make_sample(f"{subject}-p0", subject, "probe", group))
        samples.append(make_sample(f"{subject}-p1", subject, "probe", group))
        models.append(ModelSpec(f"m-{subject}", subject, [f"{subject}-e0"]))
    return Protocol(
        name=name,
        kind="verification_split",
        samples=samples,
        models=models,
        sub_protocols=["all"],
    )


@pytest.fixture
def split_protocol():
    return make_split_protocol()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
