#include "loadpat/error.hpp"

namespace loadpat {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AllConsumersDropped: return "AllConsumersDropped";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::MissingAttribute: return "MissingAttribute";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoKnee: return "NoKnee";
    case ErrorCode::NoProfilesForConsumer: return "NoProfilesForConsumer";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooManyFeatures: return "TooManyFeatures";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::ConsumerMismatch: return "ConsumerMismatch";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadConfig:
      return ErrorKind::Config;
    case ErrorCode::NoKnee:
    case ErrorCode::Diverged:
      return ErrorKind::Numeric;
    default:
      return ErrorKind::Data;
  }
}

}  // namespace loadpat
