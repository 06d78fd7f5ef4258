// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "aetorque.h"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = fs::path(AET_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(aet_version()).size() > 0);
  CHECK(std::string(aet_status_name(AET_ERR_IO)) == "io");
}

TEST_CASE("stream handles") {
  const auto dir = scratch("stream");
  const std::vector<float> x{1.0f, -2.5f, 0.0f, 4.0f};
  const char* manifest =
      R"({"campaign_id":"B","sensor_id":"s","sample_rate_hz":1000,"n_samples":4,)"
      R"("torque_schedule":[{"class":1,"start":0,"end":4}],"num_classes":7,"encoding":"f32le-v1"})";
  aet_stream* s = nullptr;
  REQUIRE(aet_stream_create(manifest, x.data(), x.size(), &s) == AET_OK);
  CHECK(aet_stream_n_samples(s) == 4);
  CHECK(aet_stream_write(s, (dir + "/a").c_str()) == AET_OK);
  aet_stream* back = nullptr;
  REQUIRE(aet_stream_read((dir + "/a.f32le").c_str(), &back) == AET_OK);
  CHECK(std::vector<float>(aet_stream_samples(back), aet_stream_samples(back) + 4) == x);
  char* mj = nullptr;
  REQUIRE(aet_stream_manifest_json(back, &mj) == AET_OK);
  CHECK(std::string(mj).find("\"campaign_id\":\"B\"") != std::string::npos);
  aet_string_free(mj);

  aet_stream* same = nullptr;
  REQUIRE(aet_denoise(back, 0, 1.0, 1, &same) == AET_OK);
  CHECK(std::vector<float>(aet_stream_samples(same), aet_stream_samples(same) + 4) == x);
  aet_stream_free(same);
  aet_stream_free(back);
  aet_stream_free(s);

  aet_stream* missing = nullptr;
  CHECK(aet_stream_read((dir + "/nope").c_str(), &missing) == AET_ERR_IO);
  CHECK(std::string(aet_last_error()).size() > 0);
  CHECK(missing == nullptr);
  CHECK(aet_stream_create("{not json", x.data(), 4, &s) == AET_ERR_FORMAT);
}

TEST_CASE("zero crossings") {
  const std::vector<float> x{1.0f, 0.5f, -0.2f, -0.8f, 0.3f, -0.1f};
  int64_t out[4];
  size_t count = 0;
  REQUIRE(aet_zero_crossings(x.data(), x.size(), out, 4, &count) == AET_OK);
  CHECK(count == 2);
  CHECK(out[0] == 2);
  CHECK(out[1] == 5);
  CHECK(aet_zero_crossings(x.data(), x.size(), nullptr, 0, &count) == AET_OK);
  CHECK(count == 2);
}

TEST_CASE("filter bank and cwt") {
  aet_filter_bank* bank = nullptr;
  REQUIRE(aet_filter_bank_create(100e3, 1024, 12, 8, 0, &bank) == AET_OK);
  CHECK(aet_filter_bank_n_scales(bank) == 96);
  CHECK(aet_filter_bank_center_freqs(bank)[0] == doctest::Approx(50e3));
  std::vector<double> x(800, 0.0), out(96 * 800, 1.0);
  REQUIRE(aet_cwt(bank, x.data(), x.size(), out.data()) == AET_OK);
  for (double v : out) CHECK(v == 0.0);
  std::vector<double> big(2000, 0.0);
  CHECK(aet_cwt(bank, big.data(), big.size(), out.data()) != AET_OK);
  aet_filter_bank_free(bank);
  CHECK(aet_filter_bank_create(-1, 1024, 12, 8, 0, &bank) == AET_ERR_INVALID_ARGUMENT);
}

TEST_CASE("losses and schedule") {
  const std::vector<double> p(7, 1.0 / 7);
  double v = 0;
  REQUIRE(aet_loss_value("pom1a", 4, p.data(), p.size(), &v) == AET_OK);
  CHECK(std::abs(v + std::log(3.0 / 7.0)) < 1e-9);
  std::vector<double> gp(7), gz(7);
  REQUIRE(aet_loss_grad("pom1b", 4, p.data(), p.size(), gp.data(), gz.data()) == AET_OK);
  CHECK(gp[3] == doctest::Approx(-7.0));
  CHECK(aet_loss_value("hinge", 1, p.data(), p.size(), &v) == AET_ERR_INVALID_ARGUMENT);
  double lr = 0;
  REQUIRE(aet_onecycle_lr(0.01, 100, 0, &lr) == AET_OK);
  CHECK(lr == doctest::Approx(0.0004));
  REQUIRE(aet_onecycle_lr(0.01, 100, 30, &lr) == AET_OK);
  CHECK(lr == doctest::Approx(0.01));
}

TEST_CASE("confusion handles") {
  aet_confusion* a = nullptr;
  aet_confusion* b = nullptr;
  REQUIRE(aet_confusion_create(3, &a) == AET_OK);
  REQUIRE(aet_confusion_create(3, &b) == AET_OK);
  const int rows[3][3] = {{2, 1, 0}, {0, 1, 1}, {1, 0, 2}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int n = 0; n < rows[i][j]; ++n) aet_confusion_accumulate(n % 2 ? a : b, i + 1, j + 1);
    }
  }
  REQUIRE(aet_confusion_merge(a, b) == AET_OK);
  double acc = 0, pm1 = 0, r = 0, pr = 0, f1 = 0;
  REQUIRE(aet_confusion_acc(a, &acc, &pm1) == AET_OK);
  CHECK(acc == doctest::Approx(0.625));
  CHECK(pm1 == doctest::Approx(0.875));
  std::vector<double> rec(3), prec(3);
  REQUIRE(aet_confusion_prf_pm1(a, rec.data(), prec.data(), &r, &pr, &f1) == AET_OK);
  CHECK(f1 == doctest::Approx(0.5673758865));
  CHECK(prec[1] == doctest::Approx(0.25));
  char* js = nullptr;
  REQUIRE(aet_confusion_metrics_json(a, &js) == AET_OK);
  CHECK(std::string(js).find("\"acc_pm1\": 0.875") != std::string::npos);
  aet_string_free(js);
  CHECK(aet_confusion_accumulate(a, 4, 1) == AET_ERR_INVALID_ARGUMENT);
  aet_confusion_free(a);
  aet_confusion_free(b);
}

TEST_CASE("pipeline stages through the C API") {
  const auto dir = scratch("stages");
  const std::string synth = R"({"out":")" + dir + R"(/streams","seconds_per_level":0.1,"campaigns":"B,C"})";
  char* result = nullptr;
  REQUIRE(aet_run_stage("synth", synth.c_str(), &result) == AET_OK);
  CHECK(std::string(result).find("\"stage\":\"synth\"") != std::string::npos);
  aet_string_free(result);
  CHECK(aet_run_stage("synth", "{}", nullptr) == AET_ERR_INVALID_ARGUMENT);
  CHECK(aet_run_stage("synth", "[1,", nullptr) == AET_ERR_INVALID_ARGUMENT);
  CHECK(aet_run_stage("warp", "{}", nullptr) == AET_ERR_INVALID_ARGUMENT);

  const std::string seg = R"({"in":")" + dir + R"(/streams","out":")" + dir + R"(/seg"})";
  REQUIRE(aet_run_stage("segment", seg.c_str(), nullptr) == AET_OK);
  const std::string sc = R"({"in":")" + dir + R"(/seg","out":")" + dir + R"(/sc","no_png":true,"png":false})";
  REQUIRE(aet_run_stage("scalogram", sc.c_str(), nullptr) == AET_OK);
  const std::string ds = R"({"in":")" + dir + R"(/sc","out":")" + dir + R"(/ds","test_campaign":"C"})";
  REQUIRE(aet_run_stage("dataset", ds.c_str(), nullptr) == AET_OK);
  const std::string tr = R"({"in":")" + dir + R"(/ds","out":")" + dir + R"(/tr","epochs":1})";
  REQUIRE(aet_run_stage("train", tr.c_str(), nullptr) == AET_OK);

  aet_model* m = nullptr;
  REQUIRE(aet_model_load((dir + "/tr/model.bin").c_str(), &m) == AET_OK);
  CHECK(aet_model_num_classes(m) == 7);
  CHECK(aet_model_feature_dim(m) == 256);
  std::vector<double> f(256, 0.1), probs(7);
  int cls = 0;
  REQUIRE(aet_model_predict(m, f.data(), f.size(), probs.data(), &cls) == AET_OK);
  double s = 0;
  for (double v : probs) s += v;
  CHECK(s == doctest::Approx(1.0));
  CHECK(cls >= 1);
  CHECK(cls <= 7);
  CHECK(aet_model_predict(m, f.data(), 10, probs.data(), &cls) == AET_ERR_INVALID_ARGUMENT);
  aet_model_free(m);
}
