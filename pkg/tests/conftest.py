import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from egohoi.annotations import (  # noqa: E402
    CATEGORIES,
    BBox2D,
    ContactState,
    DatasetIndex,
    FrameAnnotation,
    HandInstance,
    ObjectInstance,
    Side,
)
from egohoi.metrics import Detection, GroundTruth  # noqa: E402


def to_engine(dets, gts):
    """Convert oracle-style dict instances into engine records."""
    def box(t):
        return None if t is None else BBox2D(*map(float, t))

    e_dets = [
        Detection(d["frame"], d["score"], box(d["box"]), Side(d["side"]), ContactState(d["state"]),
                  box(d["obox"]), d["ocat"] if d["obox"] is not None else None)
        for d in dets
    ]
    e_gts = {
        f: [GroundTruth(box(g["box"]), Side(g["side"]), ContactState(g["state"]), box(g["obox"]),
                        g["ocat"] if g["obox"] is not None else None) for g in v]
        for f, v in gts.items()
    }
    return e_dets, e_gts


def two_frame_index() -> DatasetIndex:
    """Frame A: left hand in contact plus three objects; frame B: right hand
    without contact plus one object."""
    a = FrameAnnotation(
        frame_id="A",
        width=640,
        height=480,
        hands=(
            HandInstance(BBox2D(100, 200, 180, 300), Side.LEFT, ContactState.IN_CONTACT,
                         active_object_id=2),
        ),
        objects=(
            ObjectInstance(1, BBox2D(10, 10, 60, 60), CATEGORIES[0]),
            ObjectInstance(2, BBox2D(170, 220, 260, 290), CATEGORIES[4]),
            ObjectInstance(3, BBox2D(400, 100, 500, 200), CATEGORIES[8]),
        ),
    )
    b = FrameAnnotation(
        frame_id="B",
        width=640,
        height=480,
        hands=(HandInstance(BBox2D(300, 250, 380, 360), Side.RIGHT, ContactState.NO_CONTACT),),
        objects=(ObjectInstance(1, BBox2D(50, 50, 150, 120), CATEGORIES[1]),),
    )
    return DatasetIndex(split="train", frames=(a, b))


@pytest.fixture
def two_frames() -> DatasetIndex:
    return two_frame_index()


# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number, title = props["criterion"]
    if report.when == "call" or report.failed:
        status = "PASS" if report.passed else "FAIL"
        if number not in _CRITERIA or status == "FAIL":
            _CRITERIA[number] = (status, title, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[number]
        line = f"[{status}] criterion {number}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)
