/*
 * Copyright 2026 The avqa Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdint>
#include <string>

#include "avqa/error.hpp"
#include "avqa/manifest.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace avqa;

namespace {

std::string entry_json(const std::string& id, int w, int h, const std::string& scene = "outdoor",
                       int channels = 2) {
  return "{\"sequence_id\":\"" + id + "\",\"width\":" + std::to_string(w) +
         ",\"height\":" + std::to_string(h) +
         ",\"fps\":30,\"duration_s\":20,\"scene\":\"" + scene +
         "\",\"device\":\"insta360_x3\",\"audio_channels\":" + std::to_string(channels) +
         ",\"audio_sample_rate\":48000,\"motion\":\"static\",\"split\":\"unassigned\"}";
}

std::string y4m_bytes(int w, int h, int frames, const std::string& magic = "YUV4MPEG2 ",
                      const std::string& chroma = "C420jpeg") {
  std::string s = magic + "W" + std::to_string(w) + " H" + std::to_string(h) + " F25:1 Ip A1:1 " +
                  chroma + "\n";
  const int chroma_size = chroma == "Cmono" ? 0 : 2 * ((w + 1) / 2) * ((h + 1) / 2);
  for (int f = 0; f < frames; ++f) {
    s += "FRAME\n";
    for (int i = 0; i < w * h; ++i) s += static_cast<char>((i + f) % 256);
    s += std::string(static_cast<std::size_t>(chroma_size), static_cast<char>(128));
  }
  return s;
}

void put16(std::string& s, std::uint16_t v) {
  s += static_cast<char>(v & 0xff);
  s += static_cast<char>(v >> 8);
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s += static_cast<char>((v >> (8 * i)) & 0xff);
}

std::string wav_bytes(int channels, int rate, const std::vector<std::int16_t>& interleaved,
                      int format = 1) {
  std::string data;
  for (auto v : interleaved) put16(data, static_cast<std::uint16_t>(v));
  std::string s = "RIFF";
  put32(s, static_cast<std::uint32_t>(36 + data.size()));
  s += "WAVEfmt ";
  put32(s, 16);
  put16(s, static_cast<std::uint16_t>(format));
  put16(s, static_cast<std::uint16_t>(channels));
  put32(s, static_cast<std::uint32_t>(rate));
  put32(s, static_cast<std::uint32_t>(rate * channels * 2));
  put16(s, static_cast<std::uint16_t>(channels * 2));
  put16(s, 16);
  s += "data";
  put32(s, static_cast<std::uint32_t>(data.size()));
  return s + data;
}

}  // namespace

TEST_SUITE("manifest") {

TEST_CASE("300 entries across ten scenes load in order") {
  const char* scenes[] = {"hdr", "dark", "indoor", "outdoor", "night", "garden_architecture",
                          "urban_architecture", "indoor_competition", "outdoor_competition",
                          "studio_program"};
  std::string text = "[";
  for (int i = 0; i < 300; ++i)
    text += (i ? "," : "") + entry_json("seq" + std::to_string(i), 3840, 1920, scenes[i % 10]);
  text += "]";
  const auto entries = parse_manifest(text);
  REQUIRE(entries.size() == 300);
  CHECK(entries[0].sequence_id == "seq0");
  CHECK(entries[299].sequence_id == "seq299");
  CHECK(entries[9].scene == Scene::kStudioProgram);
  CHECK(parse_manifest(format_manifest(entries)).size() == 300);
  CHECK(format_manifest(parse_manifest(format_manifest(entries))) == format_manifest(entries));
}

TEST_CASE("empty manifest is an error") {
  CHECK_THROWS_WITH_AS(parse_manifest(""), doctest::Contains("empty manifest"), DataError);
  CHECK_THROWS_WITH_AS(parse_manifest("[]"), doctest::Contains("empty manifest"), DataError);
}

TEST_CASE("square frames are not ERP") {
  CHECK_THROWS_WITH_AS(parse_manifest("[" + entry_json("a", 1024, 1024) + "]"),
                       doctest::Contains("not 2:1 ERP"), ValidationError);
}

TEST_CASE("manifest rejects duplicates, bad channels and unknown fields") {
  CHECK_THROWS_AS(parse_manifest("[" + entry_json("a", 64, 32) + "," + entry_json("a", 64, 32) + "]"),
                  ValidationError);
  CHECK_THROWS_AS(parse_manifest("[" + entry_json("a", 64, 32, "outdoor", 3) + "]"), ValidationError);
  std::string extra = entry_json("a", 64, 32);
  extra.insert(1, "\"colour\":1,");
  CHECK_THROWS_AS(parse_manifest("[" + extra + "]"), DataError);
  CHECK_THROWS_WITH(parse_manifest("[\n{\"sequence_id\": }\n]"), doctest::Contains("line 2"));
}

TEST_CASE("y4m: 8 frames of 64x32") {
  const auto seq = parse_y4m(y4m_bytes(64, 32, 8));
  CHECK(seq.num_frames() == 8);
  CHECK(seq.width == 64);
  CHECK(seq.height == 32);
  CHECK(seq.fps() == 25.0);
  CHECK(seq.frames[3][0] == 3.0f);
  CHECK(seq.frames[0][300] == static_cast<float>(300 % 256));
}

TEST_CASE("y4m: mono streams and luma round trip") {
  const std::string mono = y4m_bytes(16, 8, 2, "YUV4MPEG2 ", "Cmono");
  const auto seq = parse_y4m(mono);
  CHECK(seq.num_frames() == 2);
  const auto again = parse_y4m(format_y4m(seq));
  CHECK(again.frames == seq.frames);

  const auto color = parse_y4m(y4m_bytes(64, 32, 3));
  CHECK(format_y4m(color) == y4m_bytes(64, 32, 3));
}

TEST_CASE("y4m: bad magic, truncation and unsupported chroma") {
  CHECK_THROWS_AS(parse_y4m(y4m_bytes(64, 32, 1, "YUV4MPEG3 ")), DataError);
  std::string bytes = y4m_bytes(64, 32, 2);
  bytes.pop_back();
  CHECK_THROWS_WITH_AS(parse_y4m(bytes), doctest::Contains("truncated"), DataError);
  CHECK_THROWS_AS(parse_y4m(y4m_bytes(64, 32, 1, "YUV4MPEG2 ", "C444")), DataError);
}

TEST_CASE("wav: mono silence, four channels, full-scale negative") {
  const auto silence = parse_wav(wav_bytes(1, 16000, std::vector<std::int16_t>(16000, 0)));
  CHECK(silence.channels() == 1);
  CHECK(silence.length() == 16000);
  CHECK(silence.sample_rate == 16000);
  bool all_zero = true;
  for (double v : silence.samples[0]) all_zero = all_zero && v == 0.0;
  CHECK(all_zero);

  const auto quad = parse_wav(wav_bytes(4, 48000, {1, 2, 3, 4, 5, 6, 7, 8}));
  CHECK(quad.channels() == 4);
  CHECK(quad.length() == 2);
  CHECK(quad.samples[2][1] == 7.0 / 32768.0);

  const auto neg = parse_wav(wav_bytes(1, 8000, {-32768, 32767}));
  CHECK(neg.samples[0][0] == -1.0);
  CHECK(neg.samples[0][1] == 32767.0 / 32768.0);
}

TEST_CASE("wav: non-PCM and odd channel counts rejected") {
  CHECK_THROWS_AS(parse_wav(wav_bytes(1, 8000, {0, 0}, 3)), DataError);
  CHECK_THROWS_AS(parse_wav(wav_bytes(3, 8000, {0, 0, 0})), DataError);
  CHECK_THROWS_AS(parse_wav("RIFX"), DataError);
}

TEST_CASE("wav round trip is byte-exact") {
  const std::string bytes = wav_bytes(2, 16000, {0, -32768, 32767, 5, -5, 100});
  CHECK(format_wav(parse_wav(bytes)) == bytes);
}

TEST_CASE("downmix") {
  AudioClip c;
  c.sample_rate = 8000;
  c.samples = {{0.5, -0.25, 1.0}, {-0.5, 0.25, -1.0}};
  const auto z = downmix_mono(c);
  REQUIRE(z.channels() == 1);
  for (double v : z.samples[0]) CHECK(v == 0.0);

  AudioClip mono;
  mono.samples = {{0.1, 0.2, -0.3}};
  CHECK(downmix_mono(mono).samples == mono.samples);

  AudioClip quad;
  quad.samples = {std::vector<double>(5, 1.0), std::vector<double>(5, 0.0),
                  std::vector<double>(5, 0.0), std::vector<double>(5, 0.0)};
  const auto q = downmix_mono(quad);
  for (double v : q.samples[0]) CHECK(v == 0.25);
}

TEST_CASE("downmix is linear") {
  nn::Rng rng(5);
  AudioClip a, b, sum;
  for (int ch = 0; ch < 4; ++ch) {
    std::vector<double> x(64), y(64), s(64);
    for (int i = 0; i < 64; ++i) {
      x[i] = rng.uniform(-0.5, 0.5);
      y[i] = rng.uniform(-0.5, 0.5);
      s[i] = x[i] + y[i];
    }
    a.samples.push_back(x);
    b.samples.push_back(y);
    sum.samples.push_back(s);
  }
  const auto da = downmix_mono(a), db = downmix_mono(b), ds = downmix_mono(sum);
  for (int i = 0; i < 64; ++i) CHECK(std::abs(ds.samples[0][i] - da.samples[0][i] - db.samples[0][i]) <= 1e-12);
}

TEST_CASE("resampling keeps duration") {
  AudioClip c;
  c.sample_rate = 48000;
  c.samples = {std::vector<double>(48000, 0.5)};
  const auto r = resample_linear(c, 16000);
  CHECK(r.sample_rate == 16000);
  CHECK(r.length() == 16000);
  CHECK(r.samples[0][100] == doctest::Approx(0.5));
}

TEST_CASE("ratings table") {
  const std::string text =
      "subject_id,sequence_id,session_id,score,ssq_flag\n"
      "s1,v1,a,55.5,0\n"
      "s2,v1,b,100,1\n";
  const auto r = parse_ratings(text);
  REQUIRE(r.size() == 2);
  CHECK(r[0].score == 55.5);
  CHECK_FALSE(r[0].ssq_flag);
  CHECK(r[1].ssq_flag);
  CHECK(parse_ratings(format_ratings(r)).size() == 2);
  CHECK_THROWS_AS(parse_ratings("subject_id,sequence_id,session_id,score,ssq_flag\ns,v,a,101,0\n"),
                  DataError);
  CHECK_THROWS_AS(parse_ratings("subject,sequence_id,session_id,score,ssq_flag\n"), DataError);
}

TEST_CASE("label anchors") {
  CHECK(anchor_score(RatingLabel::kBad) == 10.0);
  CHECK(anchor_score(RatingLabel::kExcellent) == 90.0);
  CHECK(nearest_label(49.0) == RatingLabel::kFair);
  CHECK(nearest_label(0.0) == RatingLabel::kBad);
  CHECK(nearest_label(100.0) == RatingLabel::kExcellent);
}

TEST_CASE("file round trip through disk") {
  avqa::testing::TempDir dir("manifest");
  const auto seq = parse_y4m(y4m_bytes(8, 4, 2));
  write_y4m(dir.path() / "a" / "v.y4m", seq);
  CHECK(load_y4m(dir.path() / "a" / "v.y4m").frames == seq.frames);
  CHECK_THROWS_AS(load_y4m(dir.path() / "missing.y4m"), DataError);
}

}  // TEST_SUITE
