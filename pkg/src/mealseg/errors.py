"""Exception hierarchy shared by all mealseg modules.

Every error carries a stable machine-readable ``code`` so the HTTP layer
can map exceptions to wire errors without string matching.
"""


class MealsegError(Exception):
    code = "internal"


# backend loading / execution
class MissingModel(MealsegError):
    code = "missing_model"


class CorruptModel(MealsegError):
    code = "corrupt_model"


class OversizeImage(MealsegError):
    code = "oversize_image"


class RuntimeFailure(MealsegError):
    code = "runtime_failure"


# prompting
class EmptyPrompt(MealsegError):
    code = "empty_prompt"


class UnsupportedExcludePoint(MealsegError):
    code = "unsupported_exclude_point"


class OutOfBounds(MealsegError):
    code = "out_of_bounds"


# session state machine
class NothingToUndo(MealsegError):
    code = "nothing_to_undo"


class NoPendingMask(MealsegError):
    code = "no_pending_mask"


class EmptyMask(MealsegError):
    code = "empty_mask"


class UnknownCategory(MealsegError):
    code = "unknown_category"


class InvalidQuantity(MealsegError):
    code = "invalid_quantity"


class UnknownItem(MealsegError):
    code = "unknown_item"


# categories
class DuplicateCategory(MealsegError):
    code = "duplicate_category"


class EmptyName(MealsegError):
    code = "empty_name"


# persistence
class MissingFile(MealsegError):
    code = "missing_file"


class IoFailure(MealsegError):
    code = "io_failure"


class SchemaVersionUnsupported(MealsegError):
    code = "schema_version_unsupported"


class DigestMismatch(MealsegError):
    code = "digest_mismatch"


class LengthMismatch(MealsegError):
    code = "length_mismatch"


class MalformedRuns(MealsegError):
    code = "malformed_runs"


class MissingMaskForImage(MealsegError):
    code = "missing_mask_for_image"


class UnreadableRaster(MealsegError):
    code = "unreadable_raster"


# evaluation
class EmptyGroundTruth(MealsegError):
    code = "empty_ground_truth"


class DimensionMismatch(MealsegError):
    code = "dimension_mismatch"
