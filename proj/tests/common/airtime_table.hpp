#pragma once

#include <cstddef>
#include <cstdint>

namespace lorasim::testdata {

struct AirtimeRow {
  int sf;
  std::uint32_t bw;
  int cr;
  std::size_t payload;
  bool crc;
  bool explicit_header;
  std::int64_t expected_us;
};

// Produced by tests/oracle/airtime_oracle.py (floating-point reference).
constexpr AirtimeRow kOracle[] = {
    {7, 125000, 5, 252, true, true, 394496},
    {7, 250000, 5, 1, true, true, 12928},
    {7, 250000, 5, 64, true, true, 59008},
    {7, 250000, 8, 1, true, true, 14464},
    {7, 250000, 8, 64, true, true, 88192},
    {8, 125000, 5, 1, true, true, 51712},
    {8, 125000, 5, 64, true, true, 215552},
    {8, 125000, 8, 1, true, true, 57856},
    {8, 125000, 8, 64, true, true, 320000},
    {8, 250000, 5, 0, true, true, 25856},
    {8, 250000, 5, 252, true, true, 348416},
    {8, 250000, 8, 0, true, true, 28928},
    {8, 250000, 8, 252, true, true, 545024},
    {8, 500000, 5, 1, true, true, 12928},
    {8, 500000, 5, 64, true, true, 53888},
    {8, 500000, 8, 1, true, true, 14464},
    {8, 500000, 8, 64, true, true, 80000},
    {9, 125000, 5, 0, true, true, 103424},
    {9, 125000, 5, 252, true, true, 1250304},
    {9, 125000, 8, 0, true, true, 115712},
    {9, 125000, 8, 252, true, true, 1950720},
    {9, 500000, 5, 0, true, true, 25856},
    {9, 500000, 5, 252, true, true, 312576},
    {9, 500000, 8, 0, true, true, 28928},
    {9, 500000, 8, 252, true, true, 487680},
    {10, 250000, 5, 1, true, true, 103424},
    {10, 250000, 5, 64, true, true, 349184},
    {10, 250000, 8, 1, true, true, 115712},
    {10, 250000, 8, 64, true, true, 508928},
    {11, 125000, 5, 1, true, true, 413696},
    {11, 125000, 5, 64, true, true, 1560576},
    {11, 125000, 8, 1, true, true, 462848},
    {11, 125000, 8, 64, true, true, 2297856},
    {11, 250000, 5, 0, true, true, 165888},
    {11, 250000, 5, 252, true, true, 2050048},
    {11, 250000, 8, 0, true, true, 165888},
    {11, 250000, 8, 252, true, true, 3180544},
    {11, 500000, 5, 1, true, true, 103424},
    {11, 500000, 5, 64, true, true, 328704},
    {11, 500000, 8, 1, true, true, 115712},
    {11, 500000, 8, 64, true, true, 476160},
    {12, 125000, 5, 0, true, true, 663552},
    {12, 125000, 5, 252, true, true, 9019392},
    {12, 125000, 8, 0, true, true, 663552},
    {12, 125000, 8, 252, true, true, 14032896},
    {12, 500000, 5, 0, true, true, 165888},
    {12, 500000, 5, 252, true, true, 1886208},
    {12, 500000, 8, 0, true, true, 165888},
    {12, 500000, 8, 252, true, true, 2918400},
    {9, 125000, 6, 100, true, true, 648192},
    {10, 250000, 7, 17, true, true, 197632},
    {12, 125000, 5, 10, true, true, 991232},
    {11, 125000, 6, 51, true, true, 1511424},
    {8, 500000, 7, 200, true, true, 193152},
    {7, 125000, 5, 12, false, true, 41216},
    {7, 125000, 5, 12, true, false, 41216},
    {12, 500000, 8, 255, true, true, 2983936},
};

}  // namespace lorasim::testdata
