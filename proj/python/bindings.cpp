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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "avqa/audiofe.hpp"
#include "avqa/cli.hpp"
#include "avqa/erp.hpp"
#include "avqa/error.hpp"
#include "avqa/hm.hpp"
#include "avqa/metrics.hpp"
#include "avqa/siti.hpp"
#include "avqa/subjective.hpp"
#include "avqa/synth.hpp"

namespace py = pybind11;
using namespace avqa;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const nn::Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

FrameSequence frames_from(const Array& a, int fps) {
  if (a.ndim() != 3) throw ValidationError("frames must be a [T, H, W] array");
  FrameSequence s;
  s.height = static_cast<int>(a.shape(1));
  s.width = static_cast<int>(a.shape(2));
  s.fps_num = fps;
  const double* p = a.data();
  const std::size_t n = static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.height);
  for (py::ssize_t t = 0; t < a.shape(0); ++t) {
    s.frames.emplace_back(p + t * n, p + (t + 1) * n);
  }
  return s;
}

AudioClip clip_from(const Array& a, int sample_rate) {
  AudioClip c;
  c.sample_rate = sample_rate;
  if (a.ndim() == 1) {
    c.samples.emplace_back(a.data(), a.data() + a.shape(0));
  } else if (a.ndim() == 2) {
    for (py::ssize_t ch = 0; ch < a.shape(0); ++ch)
      c.samples.emplace_back(a.data() + ch * a.shape(1), a.data() + (ch + 1) * a.shape(1));
  } else {
    throw ValidationError("audio must be [N] or [channels, N]");
  }
  return c;
}

std::vector<RatingRecord> ratings_from(const std::vector<std::tuple<std::string, std::string, double>>& rows) {
  std::vector<RatingRecord> out;
  for (const auto& [subject, sequence, score] : rows) {
    RatingRecord r;
    r.subject_id = subject;
    r.sequence_id = sequence;
    r.score = score;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_avqa, m) {
  m.doc() = "No-reference audio-visual quality assessment for 360-degree video";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  // metrics
  m.def("plcc", &plcc, py::arg("x"), py::arg("y"));
  m.def("srocc", &srocc, py::arg("x"), py::arg("y"));
  m.def("krocc", &krocc, py::arg("x"), py::arg("y"));
  m.def("rmse", &rmse, py::arg("x"), py::arg("y"));
  m.def(
      "logistic_fit",
      [](const std::vector<double>& pred, const std::vector<double>& mos) {
        const LogisticFit f = logistic_fit(pred, mos);
        py::dict d;
        d["params"] = std::vector<double>{f.params.b1, f.params.b2, f.params.b3, f.params.b4};
        d["mapped"] = f.mapped;
        d["sse"] = f.sse;
        d["degenerate"] = f.degenerate;
        return d;
      },
      py::arg("pred"), py::arg("mos"));
  m.def(
      "evaluate",
      [](const std::vector<double>& pred, const std::vector<double>& mos) {
        const MetricReport r = evaluate_predictions(pred, mos);
        py::dict d;
        d["plcc"] = r.plcc;
        d["srocc"] = r.srocc;
        d["krocc"] = r.krocc;
        d["rmse"] = r.rmse;
        d["n"] = r.n;
        return d;
      },
      py::arg("pred"), py::arg("mos"));
  m.attr("REFERENCE") = py::dict(py::arg("srocc") = PublishedReference::kSrocc,
                                 py::arg("plcc") = PublishedReference::kPlcc,
                                 py::arg("krocc") = PublishedReference::kKrocc,
                                 py::arg("rmse") = PublishedReference::kRmse);

  // subjective
  m.def(
      "screen_subjects",
      [](const std::vector<std::tuple<std::string, std::string, double>>& rows) {
        return screen_subjects(ratings_from(rows)).rejected_subjects();
      },
      py::arg("ratings"), "Rejected subject ids from (subject, sequence, score) rows.");
  m.def(
      "compute_mos",
      [](const std::vector<std::tuple<std::string, std::string, double>>& rows) {
        py::dict out;
        for (const auto& r : compute_mos(ratings_from(rows)))
          out[py::str(r.sequence_id)] =
              py::dict(py::arg("mos") = r.mos, py::arg("std") = r.std,
                       py::arg("n_valid") = r.n_valid, py::arg("ci95") = r.ci95_half_width);
        return out;
      },
      py::arg("ratings"));

  // siti
  m.def(
      "siti",
      [](const Array& frames) {
        const SITIResult r = summarize_siti(frames_from(frames, 25));
        return py::dict(py::arg("si_mean") = r.si_mean, py::arg("si_max") = r.si_max,
                        py::arg("ti_mean") = r.ti_mean, py::arg("ti_max") = r.ti_max,
                        py::arg("si") = r.si_per_frame, py::arg("ti") = r.ti_per_frame);
      },
      py::arg("frames"), "SI/TI of a [T, H, W] luma array on the 0..255 scale.");

  // erp
  m.def(
      "partition_erp",
      [](int height, int bands) {
        std::vector<std::pair<int, int>> out;
        for (const auto& b : partition_erp(height, bands).bands) out.emplace_back(b.row_start, b.row_end);
        return out;
      },
      py::arg("height"), py::arg("bands"));
  m.def(
      "latitude_prior",
      [](int height, int bands) { return cos_latitude_prior(partition_erp(height, bands)); },
      py::arg("height"), py::arg("bands"));

  // audio
  m.def("hz_to_mel", &hz_to_mel, py::arg("hz"));
  m.def("mel_to_hz", &mel_to_hz, py::arg("mel"));
  m.def(
      "mel_filterbank",
      [](int num_mel, double fmin, double fmax, int sample_rate, int fft_bins) {
        return to_numpy(mel_filterbank(num_mel, fmin, fmax, sample_rate, fft_bins));
      },
      py::arg("num_mel") = 64, py::arg("fmin_hz") = 125.0, py::arg("fmax_hz") = 7500.0,
      py::arg("sample_rate") = 16000, py::arg("fft_bins") = 257);
  m.def(
      "log_mel",
      [](const Array& audio, int sample_rate) {
        return to_numpy(compute_log_mel(clip_from(audio, sample_rate)).values);
      },
      py::arg("audio"), py::arg("sample_rate"),
      "Log-mel spectrogram [frames, 64] of a mono [N] or multichannel [C, N] signal.");

  // head movement
  m.def(
      "hm_stats",
      [](const std::vector<double>& t, const std::vector<double>& yaw,
         const std::vector<double>& pitch, const std::vector<double>& roll) {
        HeadMovementTrace tr{t, yaw, pitch, roll};
        const HmSummary s = hm_stats(tr);
        return py::dict(py::arg("samples") = s.samples, py::arg("duration") = s.duration,
                        py::arg("yaw_speed_mean") = s.yaw.mean, py::arg("yaw_speed_max") = s.yaw.max,
                        py::arg("pitch_speed_mean") = s.pitch.mean,
                        py::arg("roll_speed_mean") = s.roll.mean,
                        py::arg("yaw_histogram") = std::vector<double>(s.yaw_histogram.begin(), s.yaw_histogram.end()),
                        py::arg("occupied_yaw_bins") = s.occupied_yaw_bins,
                        py::arg("pitch_within_30") = s.pitch_within_30);
      },
      py::arg("t"), py::arg("yaw"), py::arg("pitch"), py::arg("roll"));

  // corpus and pipeline
  m.def(
      "synth_fixture",
      [](const std::filesystem::path& dir, int sequences, std::uint64_t seed) {
        SynthOptions o;
        o.sequences = sequences;
        o.seed = seed;
        return write_synth_fixture(dir, o).size();
      },
      py::arg("dir"), py::arg("sequences") = 8, py::arg("seed") = 2026);
  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> all{"avqa"};
        all.insert(all.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : all) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line subcommand; returns (exit_code, stdout, stderr).");
}
