#pragma once

#include <string>
#include <vector>

#include "discourse/perspectives.hpp"

namespace discourse::testing {

/// One side of a PTP with the digest the Python oracle computed for it.
struct DigestFixture {
    std::string name;
    PTPCluster ptp;  // every member on the left
    std::vector<TalkingPoint> points;
    std::vector<DigestEntry> positive;
    std::vector<DigestEntry> negative;
};

std::vector<DigestFixture> load_digest_fixtures();

/// Empty when `digest` equals the expectation, otherwise the first difference.
std::string digest_mismatch(const DigestFixture& fixture, const MetadataDigest& digest);

}  // namespace discourse::testing
