import numpy as np
import pytest

from sisa_detect import DocumentError, build_document, make_region, rle_encode, validate_document


def region(**over):
    base = dict(region_id=0, kind="object", class_label="cat",
                bbox=(1, 2, 4, 3), confidence=0.9)
    base.update(over)
    return make_region(**base)


class TestRle:
    def test_leading_zero_run(self):
        bits = np.array([[1, 0], [1, 0]], bool)
        assert rle_encode(bits) == [0, 1, 1, 1, 1]

    def test_all_zero(self):
        assert rle_encode(np.zeros((2, 3), bool)) == [6]

    def test_all_one(self):
        assert rle_encode(np.ones((2, 2), bool)) == [0, 4]

    def test_runs_sum(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            bits = rng.random((5, 7)) < 0.5
            assert sum(rle_encode(bits)) == 35


class TestBuild:
    def test_canonical_field_order(self):
        entry = region(mask=np.ones((3, 4), bool), identity="ada")
        assert list(entry) == ["id", "kind", "class_label", "bbox",
                               "confidence", "mask_rle", "identity"]

    def test_optional_fields_omitted(self):
        entry = region()
        assert "mask_rle" not in entry and "identity" not in entry

    def test_document_validates(self):
        doc = build_document(10, 10, [region()])
        assert doc["schema_version"] == 1
        validate_document(doc)

    def test_mask_shape_checked(self):
        with pytest.raises(DocumentError):
            region(mask=np.ones((2, 2), bool))


class TestValidate:
    def good(self):
        return build_document(10, 10, [region(), region(region_id=1, bbox=(0, 0, 2, 2))])

    def test_rejects_bad_version(self):
        doc = self.good()
        doc["schema_version"] = 2
        with pytest.raises(DocumentError):
            validate_document(doc)

    def test_rejects_duplicate_ids(self):
        doc = self.good()
        doc["regions"][1]["id"] = 0
        with pytest.raises(DocumentError):
            validate_document(doc)

    def test_rejects_out_of_bounds(self):
        doc = self.good()
        doc["regions"][0]["bbox"] = [8, 8, 4, 4]
        with pytest.raises(DocumentError):
            validate_document(doc)

    def test_rejects_bad_kind(self):
        doc = self.good()
        doc["regions"][0]["kind"] = "vehicle"
        with pytest.raises(DocumentError):
            validate_document(doc)

    def test_rejects_bad_mask_sum(self):
        doc = self.good()
        doc["regions"][0]["mask_rle"] = [0, 3]
        with pytest.raises(DocumentError):
            validate_document(doc)

    def test_rejects_confidence_out_of_range(self):
        doc = self.good()
        doc["regions"][0]["confidence"] = 1.2
        with pytest.raises(DocumentError):
            validate_document(doc)
