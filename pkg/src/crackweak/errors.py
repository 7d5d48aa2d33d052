"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class CrackweakError(Exception):
    """Base class for every error raised by this package."""

    code = "error"

    def to_dict(self) -> dict:
        return {"error": self.code, "type": type(self).__name__, "message": str(self)}


class StructuralError(CrackweakError, ValueError):
    """Rasters or lists whose shapes do not line up."""

    code = "structural"


class ParameterError(CrackweakError, ValueError):
    """A numeric parameter outside its valid range."""

    code = "parameter"


class InputError(CrackweakError, ValueError):
    """Input data that violates an operation's precondition."""

    code = "input"


class RasterFileError(CrackweakError):
    """Problems reading a raster from disk."""

    code = "file"


class MissingFileError(RasterFileError, FileNotFoundError):
    code = "missing_file"


class ColorTypeError(RasterFileError):
    code = "color_type"


class DimensionMismatchError(StructuralError):
    code = "dimension_mismatch"


class SearchFailureError(CrackweakError):
    """Raised when the alpha search runs out of trials.

    ``best_mask`` and ``best_record`` hold the candidate whose recall came
    closest to the target window.
    """

    code = "search_failure"

    def __init__(self, message: str, best_mask=None, best_record=None):
        super().__init__(message)
        self.best_mask = best_mask
        self.best_record = best_record


class ManifestError(CrackweakError):
    code = "manifest"


class MissingAnnotationError(ManifestError):
    code = "missing_annotation"


class DuplicateStemError(ManifestError):
    code = "duplicate_stem"


class SplitFileError(ManifestError):
    code = "split_file"


class UnknownSplitIdError(SplitFileError):
    """The split file names ids that are not in the dataset."""

    code = "unknown_split_id"

    def __init__(self, ids):
        self.ids = sorted(ids)
        super().__init__("split file names unknown image ids: " + ", ".join(self.ids))


class ImageProcessingError(CrackweakError):
    """Wraps a component failure with the id of the image being processed."""

    code = "image"

    def __init__(self, image_id: str, cause: Exception):
        self.image_id = image_id
        self.cause = cause
        super().__init__(f"{image_id}: {cause}")

    def to_dict(self) -> dict:
        out = super().to_dict()
        out["image_id"] = self.image_id
        if isinstance(self.cause, CrackweakError):
            out["cause"] = self.cause.to_dict()
        else:
            out["cause"] = {"type": type(self.cause).__name__, "message": str(self.cause)}
        return out
