#pragma once

namespace spvs {

// Reserved vocabulary ids.
inline constexpr int kPadId = 0;
inline constexpr int kClsId = 1;
inline constexpr int kSepId = 2;
inline constexpr int kUnkId = 3;
inline constexpr int kReservedTokens = 4;

}  // namespace spvs
