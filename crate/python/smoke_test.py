"""Quick check of the tpms_forge Python module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import json
import math
import tempfile
from pathlib import Path

import tpms_forge as tf


def main():
    rows = tf.surfaces()
    assert len(rows) == 16, rows
    assert rows[0]["tag"] == "gyroid"

    f = tf.FieldSpec("gyroid", period=50.0)
    # F(-p) = -F(p) for the gyroid
    assert math.isclose(f.evaluate(1.0, 2.0, 3.0), -f.evaluate(-1.0, -2.0, -3.0), abs_tol=1e-12)

    r = tf.solve_density(f, (50.0, 50.0, 50.0), 48, 0.3)
    assert abs(r["achieved"] - 0.3) <= 0.005, r

    spec = tf.BrickSpec(surface="diamond", period=25.0, mode="sheet", t=0.3,
                        domain=(50.0, 50.0, 60.0), base=5.0, resolution=48)
    brick = tf.build_brick(spec)
    report = brick.report
    assert report["watertight"], report
    assert len(brick.mesh) > 0

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "brick.stl"
        side = brick.save(str(path))
        assert json.loads(Path(side).read_text())["watertight"]
        back = tf.Mesh.read(str(path))
        assert len(back) == len(brick.mesh)
        assert back.report()["watertight"]

    assert tf.BrickSpec.from_json(spec.to_json()).to_json() == spec.to_json()
    try:
        tf.BrickSpec(domain=(150.0, 150.0, 250.0))
    except ValueError as e:
        assert str(e).startswith("ENVELOPE_EXCEEDED"), e
    else:
        raise AssertionError("oversize spec accepted")

    print(f"ok: {len(brick.mesh)} triangles, density {report['relative_density']:.3f}")


if __name__ == "__main__":
    main()
