public class Run17 {
    public static void main(String[] args) {
        int v = 80;
        String s = String.valueOf(v);
        String t = s + "!";
        System.out.println(t);
    }
}
