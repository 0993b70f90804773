package corpus;

public class Counters {
    private int hits;
    private int misses;
    private long totalLatency;
    protected String name;

    Counters(String name) {
        this.name = name;
    }

    int getHits() {
        return hits;
    }

    int getMisses() {
        return misses;
    }

    void hit(long latency) {
        hits++;
        totalLatency += latency;
    }

    void miss() {
        misses++;
    }

    double ratio() {
        int total = hits + misses;
        return total == 0 ? 0.0 : (double) hits / total;
    }

    long averageLatency() {
        return hits == 0 ? 0 : totalLatency / hits;
    }

    static class Named extends Counters {
        private String label;

        Named(String n, String label) {
            super(n);
            this.label = label;
        }

        String getLabel() {
            return label;
        }

        String summary() {
            return name + "/" + label + ":" + getHits() + "/" + getMisses();
        }
    }

    static class Windowed extends Counters {
        private final int[] window = new int[10];
        private int idx;

        Windowed(String n) {
            super(n);
        }

        void record(int v) {
            window[idx] = v;
            idx = (idx + 1) % window.length;
            if (v > 0) hit(v);
            else miss();
        }

        int windowSum() {
            int s = 0;
            for (int i = 0; i < window.length; i++) s += window[i];
            return s;
        }
    }
}
