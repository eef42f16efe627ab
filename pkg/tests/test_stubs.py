import pytest

from sisa import ValidationError, parse_regions, stub_document, stub_regions
from sisa.stubs import center_box_regions, grid_regions


class TestCenterBox:
    def test_default_fraction(self):
        (region,) = center_box_regions(100, 100, 0.30)
        assert region.bbox.area / 10000 == pytest.approx(0.30, abs=0.02)
        # centered: symmetric margins within a pixel
        assert abs(region.bbox.p - (100 - region.bbox.p - region.bbox.l)) <= 1
        assert abs(region.bbox.q - (100 - region.bbox.q - region.bbox.b)) <= 1

    def test_full_fraction(self):
        (region,) = center_box_regions(64, 48, 1.0)
        assert (region.bbox.p, region.bbox.q) == (0, 0)
        assert (region.bbox.l, region.bbox.b) == (64, 48)

    def test_tiny_image(self):
        (region,) = center_box_regions(1, 1, 0.30)
        assert region.bbox.area == 1

    def test_bad_fraction(self):
        with pytest.raises(ValidationError):
            center_box_regions(10, 10, 0.0)


class TestGrid:
    def test_tiles_whole_image(self):
        regions = grid_regions(10, 7, 3)
        assert len(regions) == 9
        painted = [[0] * 10 for _ in range(7)]
        for r in regions:
            for y in range(r.bbox.q, r.bbox.q + r.bbox.b):
                for x in range(r.bbox.p, r.bbox.p + r.bbox.l):
                    painted[y][x] += 1
        assert all(v == 1 for row in painted for v in row)

    def test_ids_unique(self):
        regions = grid_regions(9, 9, 2)
        assert sorted(r.id for r in regions) == list(range(4))


class TestDispatch:
    def test_unknown_stub(self):
        with pytest.raises(ValidationError):
            stub_regions("magic", 10, 10)

    def test_document_parses_in_primary(self):
        doc = stub_document("grid", 20, 15, grid_k=2)
        (w, h), regions = parse_regions(doc, 20, 15)
        assert (w, h) == (20, 15)
        assert len(regions) == 4

    def test_deterministic(self):
        assert stub_document("center-box", 33, 21) == stub_document("center-box", 33, 21)
