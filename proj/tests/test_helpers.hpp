#pragma once

#include <string>
#include <vector>

#include "riskstrat/data.hpp"

namespace riskstrat::testing {

// The canonical five-feature CSV used across the ingest tests.
inline std::string small_csv() {
    return "RIDAGEYR,INDFMPIR,RIDRETH1,RIAGENDR,MCQ010,RISK\n"
           "4,1.0,3,1,2,0\n"
           "8,3.0,3,2,1,1\n"
           "12,2.5,5,2,2,1\n";
}

// Very light well-formedness check: declarations/comments stripped, every
// open tag matched by a close tag in order.
bool xml_well_formed(const std::string& doc);

}  // namespace riskstrat::testing
