#include <doctest.h>

#include <thread>

#include <httplib.h>

#include "converge/error.hpp"
#include "converge/http_provider.hpp"
#include "converge/provider.hpp"

using namespace converge;
using nlohmann::json;

namespace {

const std::string kExtract = "task: extract_viewpoints\n";

json extract(const std::string& transcript) {
  return json::parse(deterministic_mock_extract(kExtract, transcript, 42));
}

}  // namespace

TEST_CASE("mock rule table labels sentences") {
  CHECK(extract("Our approach deploys point-of-use filters.")["viewpoints"][0]["nabc"] == "A");
  CHECK(extract("Rural towns lack clean water.")["viewpoints"][0]["nabc"] == "N");
  CHECK(extract("Filters improve health outcomes.")["viewpoints"][0]["nabc"] == "B");
  CHECK(extract("Existing filters cost too much.")["viewpoints"][0]["nabc"] == "C");
  CHECK(extract("The weather was nice.")["viewpoints"].empty());
}

TEST_CASE("mock summary is the first ten words and the quote the full sentence") {
  const std::string s = "We need one two three four five six seven eight nine ten words.";
  const auto v = extract("Intro line here. " + s)["viewpoints"][0];
  CHECK(v["summary"] == "We need one two three four five six seven eight");
  CHECK(v["quote"] == s);
}

TEST_CASE("mock keeps at most ten viewpoints, in transcript order") {
  std::string t;
  for (int i = 0; i < 15; ++i) t += "We need item " + std::to_string(i) + ". ";
  const auto vs = extract(t)["viewpoints"];
  REQUIRE(vs.size() == 10);
  CHECK(vs[0]["quote"] == "We need item 0.");
  CHECK(vs[9]["quote"] == "We need item 9.");
}

TEST_CASE("mock prefers higher-scoring sentences") {
  std::string t = "Low need one. ";
  for (int i = 0; i < 10; ++i) t += "We need and lack item " + std::to_string(i) + ". ";
  const auto vs = extract(t)["viewpoints"];
  REQUIRE(vs.size() == 10);
  for (const auto& v : vs) CHECK(v["quote"] != "Low need one.");
}

TEST_CASE("mock is a pure function") {
  const std::string t = "We need water. Our method works.";
  CHECK(deterministic_mock_extract(kExtract, t, 42) == deterministic_mock_extract(kExtract, t, 42));
  MockProvider p;
  CHECK(p.complete({kExtract, t, 1}) == p.complete({kExtract, t, 1}));
}

TEST_CASE("mock flow rule uses summary Jaccard") {
  CHECK(summary_jaccard("rural water insecurity", "rural water insecurity") == doctest::Approx(1.0));
  CHECK(summary_jaccard("alpha beta gamma", "delta epsilon zeta") == doctest::Approx(0.0));
  // {rural, water, insecurity, needs, attention} vs {... funding}: 4 shared of 6.
  CHECK(summary_jaccard("Rural water insecurity needs attention", "Rural water insecurity needs funding") ==
        doctest::Approx(4.0 / 6.0));
  const json input = {
      {"source", {{{"id", "A-x-1"}, {"summary", "Rural water insecurity needs attention"}, {"nabc", "N"}}}},
      {"candidates",
       {{{"id", "B-y-1"}, {"summary", "Rural water insecurity needs funding"}, {"nabc", "N"}},
        {{"id", "B-y-2"}, {"summary", "Sensors on every pump"}, {"nabc", "A"}}}}};
  const auto out = json::parse(deterministic_mock_extract("task: infer_flows", input.dump(), 42));
  REQUIRE(out["flows"].size() == 1);
  CHECK(out["flows"][0]["target"] == "B-y-1");
  CHECK(out["flows"][0]["kind"] == "within_category");
  CHECK(out["flows"][0]["confidence"].get<double>() == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("mock affinity is the keyword hit fraction") {
  const json input = {{"summary", "clean water pumps"}, {"keywords", {"water", "pumps", "law", "rights"}}};
  const auto out = json::parse(deterministic_mock_extract("task: domain_affinity", input.dump(), 42));
  CHECK(out["score"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("unknown task yields an error object") {
  const auto out = json::parse(deterministic_mock_extract("task: nothing", "", 42));
  CHECK(out.contains("error"));
}

TEST_CASE("prompt templates are versioned assets") {
  CHECK(prompt_template("extract_viewpoints").find("task: extract_viewpoints") != std::string::npos);
  CHECK(prompt_template("nabc_preamble").find("Needs") != std::string::npos);
  CHECK_THROWS(prompt_template("no_such_prompt"));
}

TEST_CASE("http provider speaks the chat-completions protocol") {
  httplib::Server fake;
  json seen;
  std::string auth;
  fake.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(json{{"choices", {{{"message", {{"content", "{\"viewpoints\":[]}"}}}}}}}.dump(),
                    "application/json");
  });
  fake.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"data", {{{"embedding", {0.5, 0.25}}}}}}.dump(), "application/json");
  });
  fake.Post("/broken/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
    res.set_content("boom", "text/plain");
  });
  const int port = fake.bind_to_any_port("127.0.0.1");
  std::thread t([&] { fake.listen_after_bind(); });
  fake.wait_until_ready();

  HttpProviderConfig cfg;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
  cfg.api_key = "secret";
  cfg.timeout_seconds = 5;
  HttpProvider provider(cfg);
  CHECK(provider.complete({"sys", "user text", 7}) == "{\"viewpoints\":[]}");
  CHECK(auth == "Bearer secret");
  CHECK(seen["temperature"] == 0);
  CHECK(seen["seed"] == 7);
  CHECK(seen["messages"][0]["content"] == "sys");
  CHECK(seen["messages"][1]["content"] == "user text");

  HttpEmbedder embedder(cfg);
  CHECK(embedder.embed("x").values == std::vector<double>{0.5, 0.25});

  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/broken";
  HttpProvider broken(cfg);
  CHECK_THROWS_WITH_AS(broken.complete({"s", "u", 1}), doctest::Contains("HTTP 500"), ProviderError);

  fake.stop();
  t.join();
}

TEST_CASE("http provider reports unreachable endpoints as provider errors") {
  HttpProviderConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1";
  cfg.api_key = "k";
  cfg.timeout_seconds = 1;
  HttpProvider provider(cfg);
  CHECK_THROWS_AS(provider.complete({"s", "u", 1}), ProviderError);
  cfg.endpoint = "no-scheme";
  CHECK_THROWS_AS(HttpProvider(cfg).complete({"s", "u", 1}), ProviderError);
}

TEST_CASE("credentials come from the environment") {
  ::unsetenv("CONVERGE_PROVIDER_ENDPOINT");
  ::unsetenv("CONVERGE_PROVIDER_KEY");
  std::string why;
  CHECK_FALSE(HttpProviderConfig::from_env(&why));
  CHECK(why.find("CONVERGE_PROVIDER_KEY") != std::string::npos);
  ::setenv("CONVERGE_PROVIDER_ENDPOINT", "http://example.invalid/v1", 1);
  ::setenv("CONVERGE_PROVIDER_KEY", "k", 1);
  const auto cfg = HttpProviderConfig::from_env(&why);
  REQUIRE(cfg);
  CHECK(cfg->endpoint == "http://example.invalid/v1");
  ::unsetenv("CONVERGE_PROVIDER_ENDPOINT");
  ::unsetenv("CONVERGE_PROVIDER_KEY");
}
