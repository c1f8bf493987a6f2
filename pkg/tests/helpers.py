import math

from dvem.core import CorrespondenceRecord, ImageMeta, QueryMeta
from dvem.pipeline import QueryData

KM_PER_DEG = 6371.0 * math.pi / 180


def great_circle_km(p, q):
    """Central angle from 3D unit vectors; independent of the haversine formula."""

    def vec(lat, lon):
        la, lo = math.radians(lat), math.radians(lon)
        return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))

    a, b = vec(*p), vec(*q)
    cross = (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
    return 6371.0 * math.atan2(math.sqrt(sum(c * c for c in cross)), sum(x * y for x, y in zip(a, b)))


def make_query(records, images, qid="q", w=100, h=100, truth="A"):
    """Build QueryData from (x, y, image_id, score) tuples and (image_id, label[, sim]) tuples."""
    metas = []
    for rank, spec in enumerate(images, start=1):
        iid, label = spec[0], spec[1]
        sim = spec[2] if len(spec) > 2 else 1.0
        metas.append(ImageMeta(qid, iid, rank, sim, label=label))
    corr = tuple(CorrespondenceRecord(qid, x, y, iid, s) for x, y, iid, s in records)
    return QueryData(QueryMeta(qid, w, h, truth), tuple(metas), corr)


# Two locations, three elements, a = b = 0, theta = 5, delta = 5.
#   e1 (10,10): a1 score 10, a2 score 5, b1 score 10  -> matched by both locations, weight ln(2/2) = 0
#   e2 (50,50): a1 score 5                             -> ln 2
#   e3 (90,90): b1 score 10                            -> ln 2
# Score(A) = (1 - e^-1) * (ln 2)^2, Score(B) = (1 - e^-4) * (ln 2)^2
HAND_RECORDS = [
    (10, 10, "a1", 10.0),
    (10, 10, "a2", 5.0),
    (50, 50, "a1", 5.0),
    (90, 90, "b1", 10.0),
    (10, 10, "b1", 10.0),
]
HAND_IMAGES = [("a1", "A", 15.0), ("b1", "B", 20.0), ("a2", "A", 5.0)]
HAND_SCORE_A = 0.30370422764883825
HAND_SCORE_B = 0.4716532100122716


def hand_fixture():
    return make_query(HAND_RECORDS, HAND_IMAGES)
