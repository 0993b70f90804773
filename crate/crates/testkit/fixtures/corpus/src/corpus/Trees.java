package corpus;

public class Trees {
    static class Bst {
        static class Entry {
            String key;
            int value;
            Entry left, right;

            Entry(String k, int v) {
                key = k;
                value = v;
            }
        }

        Entry root;

        void put(String k, int v) {
            root = put(root, k, v);
        }

        private Entry put(Entry e, String k, int v) {
            if (e == null) return new Entry(k, v);
            int c = k.compareTo(e.key);
            if (c < 0) e.left = put(e.left, k, v);
            else if (c > 0) e.right = put(e.right, k, v);
            else e.value = v;
            return e;
        }

        int get(String k, int dflt) {
            Entry e = root;
            while (e != null) {
                int c = k.compareTo(e.key);
                if (c == 0) return e.value;
                e = c < 0 ? e.left : e.right;
            }
            return dflt;
        }

        int height() {
            return height(root);
        }

        private static int height(Entry e) {
            if (e == null) return 0;
            return 1 + Math.max(height(e.left), height(e.right));
        }
    }

    static class Heap {
        int[] a = new int[16];
        int n;

        void add(int v) {
            if (n == a.length) {
                int[] b = new int[n * 2];
                System.arraycopy(a, 0, b, 0, n);
                a = b;
            }
            a[n] = v;
            int i = n++;
            while (i > 0 && a[(i - 1) / 2] > a[i]) {
                int p = (i - 1) / 2;
                int t = a[p];
                a[p] = a[i];
                a[i] = t;
                i = p;
            }
        }

        int poll() {
            int top = a[0];
            a[0] = a[--n];
            int i = 0;
            for (;;) {
                int l = 2 * i + 1, r = l + 1, m = i;
                if (l < n && a[l] < a[m]) m = l;
                if (r < n && a[r] < a[m]) m = r;
                if (m == i) break;
                int t = a[m];
                a[m] = a[i];
                a[i] = t;
                i = m;
            }
            return top;
        }
    }
}
