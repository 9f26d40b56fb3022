"""DICOM/PE polyglot toolkit: parsing, injection, detection, and ML triage."""

try:
    from . import _maldicom as _ext  # installed package layout
except ImportError:  # pragma: no cover - build-tree layout used by the smoke tests
    import _maldicom as _ext

Dataset = _ext.Dataset
MaldicomError = _ext.MaldicomError
Model = _ext.Model
classify_bytes = _ext.classify_bytes
create_pe_dicom = _ext.create_pe_dicom
dicom_roundtrip = _ext.dicom_roundtrip
dicom_tags = _ext.dicom_tags
evaluate = _ext.evaluate
extract_pe = _ext.extract_pe
load_csv = _ext.load_csv
model_from_json = _ext.model_from_json
pe_section_count = _ext.pe_section_count
scan_path = _ext.scan_path
shannon_entropy = _ext.shannon_entropy
shapley = _ext.shapley
smote = _ext.smote
split = _ext.split
train = _ext.train
verify_polyglot = _ext.verify_polyglot

__all__ = [
    "Dataset",
    "MaldicomError",
    "Model",
    "classify_bytes",
    "create_pe_dicom",
    "dicom_roundtrip",
    "dicom_tags",
    "evaluate",
    "extract_pe",
    "load_csv",
    "model_from_json",
    "pe_section_count",
    "scan_path",
    "shannon_entropy",
    "shapley",
    "smote",
    "split",
    "train",
    "verify_polyglot",
]

__version__ = "0.1.0"
